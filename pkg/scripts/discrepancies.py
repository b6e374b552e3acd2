"""Print the printed-versus-derived discrepancy report as a table or JSON.

    python3 scripts/discrepancies.py [--json]
"""

import argparse
import json

from llconformal.quoted import discrepancy_report


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)
    items = discrepancy_report()
    if args.json:
        print(json.dumps([item.to_dict() for item in items], indent=2))
        return
    for item in items:
        mark = "ok " if item.reproduced else "BAD"
        print(f"{mark} {item.kind:<8} {item.deviation:>11.3e}  {item.name}")


if __name__ == "__main__":
    main()
