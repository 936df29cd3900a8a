"""Find a tree whose independence polynomial vanishes inside U_3.

Near a parabolic parameter, compositions of the degree word become erratic
enough that some long word sends 0 onto -1.  Every such hit is a zero of the
independence polynomial of an explicit tree.  The hunt returns that tree
together with a high-precision certificate.

    python3 demos/hunt_a_zero.py
"""

from treezeros.errors import Exhausted
from treezeros.hunt import hunt_zero
from treezeros.trees import certify_zero

center = 0.7624680 + 2.5253695j  # multiplier-one parameter of (1, 2)
res = hunt_zero((1, 2), center, n_max=64)

w = res.witness
print(f"word (1, 2) repeated {res.n_iterates} times")
print(f"zero at lambda = {complex(res.lam):.12f}  ({res.distance:.3g} from the center)")
print(f"tree: {w.tree.vertex_count} vertices, level sizes {list(w.tree.level_sizes)[:6]}...")
print(f"certificate tier {w.tier}, orbit residual {float(w.orbit_residual):.1e}")
print(f"inside U_3: {w.udelta.member} (margin {w.udelta.margin:.3g})")

# Re-certify from scratch without refinement, as an outside check would.
fresh = certify_zero(res.full_word, res.lam, 256, refine=False)
print(f"fresh 256-bit residual: {float(fresh.orbit_residual):.1e}")

# Well inside the Shearer disc nothing should turn up.
try:
    hunt_zero((2,), 0.05, n_max=32)
except Exhausted as exc:
    print("control at lambda = 0.05:", exc)
