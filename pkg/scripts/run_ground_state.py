"""Compute one coupled ground state and print its diagnostics.

    python scripts/run_ground_state.py --beta 1 --a 1 --b 1 --profiles profile.csv
"""

import argparse
import sys

from coupled_ground.cli import profiles_csv, write_text
from coupled_ground.functionals import SystemParams
from coupled_ground.solver import SolveConfig, mass_saturation_check, minimize_ground, verify_strict_inequality


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--p", type=float, default=4.0)
    ap.add_argument("--q", type=float, default=4.0)
    ap.add_argument("--r1", type=float, default=1.75)
    ap.add_argument("--r2", type=float, default=1.75)
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--a", type=float, default=1.0)
    ap.add_argument("--b", type=float, default=1.0)
    ap.add_argument("--radius", type=float, default=15.0)
    ap.add_argument("--points", type=int, default=1501)
    ap.add_argument("--profiles")
    args = ap.parse_args()

    params = SystemParams(args.dim, args.p, args.q, args.r1, args.r2, beta=args.beta, a=args.a, b=args.b)
    res = minimize_ground(SolveConfig(params, radius=args.radius, points=args.points))
    rep = verify_strict_inequality(params, res)
    sat = mass_saturation_check(res)
    print(f"energy            {res.energy:.12g}")
    print(f"multipliers       {res.lambda1:.8g}  {res.lambda2:.8g}")
    print(f"masses            {res.masses[0]:.12g}  {res.masses[1]:.12g}")
    print(f"residual          {res.residual:.3g}  (descent {res.descent_iterations}, Newton {res.newton_iterations})")
    print(f"levels on grid    {res.semitrivial_levels[0]:.10g}  {res.semitrivial_levels[1]:.10g}")
    print(f"closed-form       {res.closed_form_levels[0]:.10g}  {res.closed_form_levels[1]:.10g}")
    print(f"strict margin     {res.strict_margin:.6g} (grid)  {res.strict_margin_closed_form:.6g} (closed form)")
    print(f"fiber maximizer   {res.fiber_t:.10g}")
    print(f"strictness        predicted {rep.predicted} [{rep.case}], observed {rep.observed_strict}: {rep.detail}")
    print(f"mass saturation   {sat.status}")
    for note in res.notes:
        print(f"note              {note}")
    if args.profiles:
        write_text(args.profiles, profiles_csv(res))
    return 0 if res.converged else 3


if __name__ == "__main__":
    sys.exit(main())
