"""Closures: constitutive functions, admissibility, characteristic speeds.

The two physical models share one interface: a pressure p(v), a flux
correction g(u) f(v), and a damping constant alpha.  This script walks
through the radiative (M1) closure and the gamma-law gas closure, checks
the structural assumptions on a state box, and prints wave speeds.

Run:  python demos/01_closures_and_speeds.py
"""

import numpy as np

from diffwave import (
    characteristic_speeds,
    check_assumptions,
    eddington_factor,
    gamma_law_closure,
    m1_closure,
    radiative_pressure_1d,
)

# --- the variable Eddington factor interpolates between isotropic (1/3)
#     and free-streaming (1) radiation -----------------------------------
for u in (0.0, 0.25, 0.5, 0.75, 1.0):
    chi = eddington_factor(u)
    print(f"chi({u:4.2f}) = {chi:.6f}   P(rho=2, u) = {radiative_pressure_1d(2.0, u):.6f}")

# --- closures bundle p, g, f with analytic derivatives ------------------
m1 = m1_closure(sigma=1.0)
gas = gamma_law_closure(gamma=2.0, alpha=1.0)
print(f"\nM1:      p(1) = {m1.p(1.0):.6f}, g(0.5) = {m1.g(0.5):.6f}, f(2) = {m1.f(2.0):.4f}")
print(f"gas law: p(1) = {gas.p(1.0):.6f}, g == 0, f == 1")

# --- structural assumptions scanned over a state box --------------------
for name, clo, ubox in (("M1", m1, (-0.3, 0.3)), ("gas", gas, (-1.0, 1.0))):
    rep = check_assumptions(clo, (0.8, 1.2), ubox)
    print(
        f"\n[{name}] sign_ok={rep.sign_ok} hyperbolic_ok={rep.hyperbolic_ok} "
        f"smooth={rep.smoothness_ok}"
    )
    print(f"     inf(g f' - p') = {rep.min_gfprime_minus_pprime:.6f}")
    print(f"     inf discriminant = {rep.min_discriminant:.6f}")

# --- characteristic speeds set the CFL limit of the solver --------------
print("\ncharacteristic speeds (v=1):")
for u in (0.0, 0.15, 0.3):
    lam_m, lam_p = characteristic_speeds(m1, 1.0, u)
    print(f"  M1  u={u:4.2f}: ({lam_m:+.6f}, {lam_p:+.6f})")
lam_m, lam_p = characteristic_speeds(gas, 1.0, 0.0)
print(f"  gas u=0.00: ({lam_m:+.6f}, {lam_p:+.6f})   (= +-sqrt(2))")
