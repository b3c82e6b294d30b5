"""Reference external-forecaster adapter: echoes the window's last value.

Speaks the line protocol expected by ExternalForecaster and doubles as a
template for wiring real models into the explainer:

    python -m tsxplain.reference_adapter
"""

from __future__ import annotations

import sys


def main() -> int:
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            print(repr(float(line.split(",")[-1])), flush=True)
        except ValueError:
            print(f"ERR cannot parse request {line!r}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
