import sys

from . import convergence, energy, measurement, snapshot

_KINDS = {
    "convergence": convergence.main,
    "energy": energy.main,
    "measurement": measurement.main,
    "snapshot": snapshot.main,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv or argv[0] not in _KINDS:
        known = ", ".join(sorted(_KINDS))
        print(f"usage: python3 -m tentdgplot {{{known}}} CSV --out FILE",
              file=sys.stderr)
        return 2
    return _KINDS[argv[0]](argv[1:])


if __name__ == "__main__":
    sys.exit(main())
