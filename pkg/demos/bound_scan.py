"""Brute-force scans of the worst-case error-gap bounds.

For a few leakage levels, enumerates every Pauli channel on a simplex
grid together with the banded choice probabilities, and compares the
largest phase/bit error gap actually achievable against the closed-form
bound the rate calculators rely on.  The scan should never exceed the
bound, and for single-parameter leakage it should touch it exactly.
"""

from bb84_weakrand import DeviationParams
from bb84_weakrand.bound_oracle import verify_cross_basis_bound, verify_one_step_bound

GRID = 21


def show(report):
    loc = report.max_gap_location
    channel = f"(q00={loc['q00']:.3f}, q01={loc['q01']:.3f}, q10={loc['q10']:.3f}, q11={loc['q11']:.3f})"
    print(f"  bound            {report.bound:.9f}")
    print(f"  scanned maximum  {report.max_difference:.9f}")
    print(f"  tightness gap    {report.tightness_gap:.2e}")
    print(f"  achieved at      channel {channel}, p_bit0={loc['p_bit0']:.3f}")
    print(f"  points checked   {report.points_checked}")
    print(f"  verdict          {'bound holds' if report.passed else 'VIOLATED'}")
    print()


def main():
    print(f"single-pass bound, grid resolution {GRID}")
    print("=" * 60)
    for eps0, eps1 in [(0.0, 0.0), (0.1, 0.0), (0.0, 0.1), (0.25, 0.25)]:
        print(f"bit leakage {eps0}, basis leakage {eps1}:")
        show(verify_one_step_bound(DeviationParams(eps0, eps1), GRID))

    print(f"cross-basis bound, grid resolution {GRID}")
    print("=" * 60)
    for eps0 in [0.0, 0.1, 0.5]:
        print(f"bit leakage {eps0}:")
        show(verify_cross_basis_bound(eps0, GRID))


if __name__ == "__main__":
    main()
