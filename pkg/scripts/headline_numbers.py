"""Print the single-point transmission and isolation values used as reference numbers."""
from optonr import SystemParams
from optonr.model import TWO_PI
from optonr.transmission import BranchPolicy, transmission

GHZ = TWO_PI * 1e9

CASES = [
    # label, detuning (GHz, both cavities), J (GHz), p_in (mW)
    ("delta=4, J=3, 15 mW", 4.0, 3.0, 15.0),
    ("delta=4.6, J=3, 20 mW", 4.6, 3.0, 20.0),
    ("delta=2J, J=4, 30 mW", 8.0, 4.0, 30.0),
    ("delta=2J, J=5, 30 mW", 10.0, 5.0, 30.0),
    ("delta=2J, J=6, 30 mW", 12.0, 6.0, 30.0),
]


def main():
    print(f"{'case':<24} {'T21':>10} {'T12':>10} {'I (dB)':>8}  branches")
    for label, delta, J, p_mW in CASES:
        p = SystemParams.baseline(delta1=delta * GHZ, delta2=delta * GHZ, J=J * GHZ)
        pt = transmission(p, p_mW * 1e-3, BranchPolicy.HIGHEST_STABLE)
        print(f"{label:<24} {pt.T21:>10.4g} {pt.T12:>10.4g} {pt.isolation_dB:>8.3f}  "
              f"{pt.branch21.value}/{pt.branch12.value}")


if __name__ == "__main__":
    main()
