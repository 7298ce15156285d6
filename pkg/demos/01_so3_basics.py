"""Tour of the rotation-group primitives: hat/vee, exp/log, metrics, projection.

Run:  python3 demos/01_so3_basics.py
"""

import numpy as np

from rotavg import so3


def main() -> None:
    rng = np.random.default_rng(42)

    print("== axis-angle vectors and skew matrices ==")
    v = np.array([0.3, -0.2, 0.5])
    S = so3.hat(v)
    print(f"v            = {v}")
    print(f"hat(v) row 0 = {S[0]}   (skew: S.T == -S -> {np.array_equal(S.T, -S)})")
    print(f"vee(hat(v))  = {so3.vee(S)}")

    print("\n== exponential and logarithm ==")
    R = so3.exp_map(v)
    print(f"exp_map(v) rotates by ||v|| = {np.linalg.norm(v):.6f} rad")
    print(f"det = {np.linalg.det(R):.12f}, R.T @ R - I max = {np.abs(R.T @ R - np.eye(3)).max():.2e}")
    back = so3.log_map(R)
    print(f"log_map(exp_map(v)) = {back}   (roundtrip error {np.linalg.norm(back - v):.2e})")

    half_turn = so3.exp_map([np.pi, 0.0, 0.0])
    print(f"half turn about x: log_map recovers {so3.log_map(half_turn)}")

    print("\n== the two metrics and how they relate ==")
    A = so3.exp_map(rng.normal(size=3))
    B = so3.exp_map(rng.normal(size=3))
    dg = so3.geodesic_distance(A, B)
    dc = so3.chordal_distance(A, B)
    print(f"geodesic(A, B) = {dg:.6f} rad = {np.degrees(dg):.2f} deg")
    print(f"chordal(A, B)  = {dc:.6f}  (Frobenius norm of A - B)")
    print(f"identity check: 2*sqrt(2)*sin(dg/2) = {2 * np.sqrt(2) * np.sin(dg / 2):.6f}")

    print("\n== projecting a noisy matrix back onto a rotation ==")
    noisy = A + rng.normal(0.0, 0.05, size=(3, 3))
    P = so3.project_to_so3(noisy)
    print(f"||noisy - A||_F = {np.linalg.norm(noisy - A):.4f}")
    print(f"||P - A||_F     = {np.linalg.norm(P - A):.4f}   (is_rotation -> {so3.is_rotation(P)})")
    print("projection refuses matrices without a unique nearest rotation:")
    try:
        so3.project_to_so3(np.diag([1.0, 0.0, 0.0]))
    except so3.DegenerateMatrix as exc:
        print(f"  DegenerateMatrix: {exc}")

    print("\n== everything is batched ==")
    stack = so3.exp_map(rng.normal(size=(4, 3)))
    print(f"exp_map on a (4, 3) stack -> {stack.shape}; distances to A -> "
          f"{np.round(so3.geodesic_distance(stack, A), 3)}")


if __name__ == "__main__":
    main()
