"""Smoke test for the pyfraclib extension module.

Build with:
    cargo build -p pyfraclib --release --features extension-module
    cp target/release/libpyfraclib.so python/pyfraclib.so
then run `python python/smoke_test.py`.
"""

import json
import math

import pyfraclib


def close(a, b, tol=1e-10):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


pts = [(0.0, 0.0), (0.4, 1.0), (0.7, -0.5), (1.0, 0.3)]
sys = pyfraclib.FractalSystem.affine_fif(pts, [0.4, -0.3, 0.5])
assert sys.variant == "continuous_interpolatory", sys.variant
for x, y in pts:
    v, bound = sys.eval(x)
    assert close(v, y, 1e-9), (x, v, y)
    assert bound >= 0.0

m = sys.moments(4)
assert close(m[0], sys.moment_oracle(0, 12), 1e-6)

back = pyfraclib.FractalSystem.from_json(sys.to_json())
assert back.alpha == sys.alpha and back.knots == sys.knots
json.loads(sys.to_json())

eq = pyfraclib.FractalSystem.affine_fif([(0.0, 0.0), (0.5, 1.0), (1.0, 0.3)], [0.4, -0.3])
z = eq.transform("fourier", 2.0, method="series", tol=1e-12)
assert isinstance(z, complex)
zq = eq.transform("fourier", 2.0)
assert abs(z - zq) < 1e-6, (z, zq)
assert eq.transform_residual("laplace", 1.0) < 1e-8

d = sys.dimension()
assert 1.0 <= d < 2.0
assert len(sys.chaos(100, seed=1)) == 100
assert sys.chaos(50, seed=3) == sys.chaos(50, seed=3)
assert sys.validate()["variant"] == "continuous_interpolatory"

knots = [0.0, 0.25, 0.5, 1.0]
freqs = [2.0, 1.0, 3.0]
sol = pyfraclib.solve_continuous(knots, freqs, [0.2])
assert sol.feasible
for a, t in zip(sol.areas, sol.targets):
    assert close(a, t, 1e-10), (a, t)

sol = pyfraclib.solve_offsets(knots, freqs, [0.1, -0.2, 0.3], [1.0, 0.0, -1.0])
assert max(abs(r) for r in sol.residuals) < 1e-12

cum = pyfraclib.cumulative_data(knots, freqs, 0.0)
assert close(cum[-1][1], 0.25 * 2.0 + 0.25 * 1.0 + 0.5 * 3.0)

try:
    pyfraclib.FractalSystem.affine_fif(pts, [1.5, 0.0, 0.0])
except ValueError:
    pass
else:
    raise AssertionError("expected ValueError for |alpha| >= 1")

print("pyfraclib smoke test passed")
