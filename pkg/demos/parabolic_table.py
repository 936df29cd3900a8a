"""Re-solve the multiplier-one parameters for degrees 3..9.

For each maximum degree delta the word (1, delta - 1) has a parameter where
its composed map owns a fixed point with multiplier exactly 1.  We recover it
with the two-equation Newton solver and check where it sits relative to the
region U_delta.

    python3 demos/parabolic_table.py
"""

from treezeros.parabolic import SolverSettings, reproduce_table, solve_parabolic

print(f"{'delta':>5}  {'lambda':>28}  {'|alpha|':>9}  {'res_fix':>9}  {'res_mult':>9}")
for delta in range(3, 10):
    row = reproduce_table(delta)
    lam, sol = complex(row.lam), row.solution
    # |alpha| is the smallest root modulus of the membership polynomial
    print(
        f"{delta:>5}  {lam.real:>13.8f}{lam.imag:+13.8f}i  {row.alpha_modulus:9.5f}  "
        f"{float(sol.res_fix):9.1e}  {float(sol.res_mult):9.1e}"
    )

# Raising the working precision costs a handful of extra Newton steps.
hi = solve_parabolic((1, 2), 1, 0.76 + 2.53j, None, SolverSettings(precision=256))
print("\ndelta 3 at 256 bits:", hi.lam)
