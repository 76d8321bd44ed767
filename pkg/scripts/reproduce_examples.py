"""Print the worked examples: both chain instances, the corner bounds and the kernel moments."""

import math

from isoholder import (
    CornerContext,
    Functional,
    IndexRange1D,
    Interval,
    Rectangle,
    compare_corner_bounds,
    kernel_moment,
    kernel_moment_exact,
    make_partition,
    verify_chain,
)


def main():
    A = Functional.integral(Interval(0, 1))
    ch = verify_chain(A, "1", "t", "1", 2, make_partition("linear-pair", A.domain))
    print(f"integral f=t g=1 p=2: lhs {ch.lhs:.6f}  refined {ch.refined:.6f}  classical {ch.classical:.6f}")

    S = Functional.sum(IndexRange1D(2))
    ch = verify_chain(S, "1", [1, 2], [1, 1], 2, make_partition("discrete-pair", S.domain))
    print(
        f"sum a=(1,2) b=(1,1) p=2: refined {ch.refined:.9f} (exact {(3 * math.sqrt(3) + 1) / 2:.9f})"
        f"  classical {ch.classical:.9f} (exact {math.sqrt(10):.9f})"
    )

    cb = compare_corner_bounds(CornerContext(Rectangle(0, 1, 0, 1), "x^2*y^2", "4*x*y", 2))
    print(f"corner bounds f=x^2 y^2 p=2: |lhs| {cb.lhs_abs:.6f} <= {cb.bound_improved:.6f} <= {cb.bound_classical:.6f}")

    for p in (1, 2, 3, 5):
        print(f"kernel moment p={p}: {kernel_moment(p):.12f} vs {kernel_moment_exact(p):.12f}")


if __name__ == "__main__":
    main()
