"""Command line entry point: render all figures for one run directory."""

import argparse
import sys

from .figures import FIGURE_IDS, render_figures


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="plot_all",
        description="Render the standard figures for a finished run "
                    "directory; figures whose inputs are absent are skipped.")
    parser.add_argument("run_dir", help="directory holding the run outputs")
    parser.add_argument("out_dir", help="directory the PNG files go to")
    parser.add_argument("--only", action="append", choices=FIGURE_IDS,
                        metavar="FIGURE", default=None,
                        help="render only the named figure (repeatable)")
    args = parser.parse_args(argv)

    results = render_figures(args.run_dir, args.out_dir, args.only)
    written = 0
    for res in results:
        if res.path is not None:
            print(f"wrote {res.figure_id} -> {res.path}")
            written += 1
        else:
            print(f"skipped {res.figure_id}: {res.message}")
    return 0 if written else 1


if __name__ == "__main__":
    sys.exit(main())
