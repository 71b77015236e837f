"""Where is the optimum of the boundary-optimum channels, exactly?

The built-in right-triangle (``phi2``), type-III (``phi3``) and five-symbol
(``phi5``) channels are meant to have optima on the edge of the simplex. Their
entries are three-decimal numbers, so whether a symbol really carries zero
mass depends on digits beyond double-precision noise. This script settles it
with a high-precision Kuhn-Tucker search and writes the outcome to
``docs/degeneracy_oracle.md``, including a JSON block that the test suite
compares against a fresh run.

Run from the repository root::

    python3 demos/degeneracy_oracle.py
"""

import json
from pathlib import Path

from arimoto_speed.catalog import equalized_weight, get_channel, stated_optimum
from arimoto_speed.hiprec import degeneracy_oracle

DPS = 50
DIGITS = 12
CHANNELS = ("phi2", "phi3", "phi5", "phi2_exact", "phi5_exact")
OUT = Path(__file__).resolve().parent.parent / "docs" / "degeneracy_oracle.md"


def run() -> dict:
    results = {}
    for name in CHANNELS:
        out = degeneracy_oracle(get_channel(name), name, dps=DPS, digits=DIGITS)
        results[name] = {
            "support": [i + 1 for i in out.support],
            "lambda_star": list(out.lambda_star),
            "capacity": out.capacity,
            "divergence_gaps": list(out.divergence_gaps),
        }
    return results


def render(results: dict) -> str:
    lines = [
        "# Degeneracy oracle outcome",
        "",
        f"Generated by `demos/degeneracy_oracle.py` ({DPS} significant digits, values shown to {DIGITS}).",
        "Symbols are numbered from 1. A gap is `D_i - C`; zero means the symbol meets the capacity bound.",
        "",
        "| channel | support | optimum | capacity (nats) | gaps |",
        "|---|---|---|---|---|",
    ]
    for name, r in results.items():
        lines.append(f"| {name} | {r['support']} | {', '.join(r['lambda_star'])} | {r['capacity']} | "
                     f"{', '.join(r['divergence_gaps'])} |")
    p2, p5 = results["phi2"], results["phi5"]
    stated = tuple(float(v) for v in stated_optimum("phi2"))
    lam3 = float(p2["lambda_star"][2])
    shortfall = p5["divergence_gaps"][2].lstrip("-")
    lines += [
        "",
        "## Reading",
        "",
        f"- `phi2`: the optimum is interior. Symbol 3 keeps mass {p2['lambda_star'][2]} instead of 0, so the",
        f"  stated point {stated} is not a fixed point of the iteration. Measured against it, μ₃ tends to",
        f"  {lam3:.5f} rather than 0 and N·μ₃ picks up a term growing like {lam3:.5f}·N ({500 * lam3:.2f} at N = 500).",
        "  The 1/N trace numbers at N = 500 therefore differ from the exactly degenerate case.",
        f"- `phi5`: the optimum stays on the two-symbol face, but symbols 3 to 5 fall short of the capacity",
        f"  by {shortfall} nats. They are type III by a hair, so convergence is eventually",
        f"  exponential with a rate of about {shortfall[:8]} per step, far slower than the 1/N transient.",
        "- `phi3`: symbol 3 is clearly type III, as intended.",
        "- `phi2_exact` and `phi5_exact` replace the rounded rows by equalized ones",
        f"  (free entries {equalized_weight('phi2_exact')[:14]} and {equalized_weight('phi5_exact')[:14]}).",
        "  Their zero-mass symbols sit on the type-II boundary. The masses of order 1e-16 in the table",
        "  come from storing the free entry as a double, not from the construction.",
        "",
        "`analyze` on `phi2` or `phi5` without `--at` warns about this near-degeneracy.",
        "",
        "## Machine-readable record",
        "",
        "```json",
        json.dumps({"dps": DPS, "digits": DIGITS, "channels": results}, indent=2),
        "```",
        "",
    ]
    return "\n".join(lines)


if __name__ == "__main__":
    results = run()
    OUT.write_text(render(results))
    for name, r in results.items():
        print(f"{name:11s} support {r['support']}  lambda* {r['lambda_star']}  C {r['capacity']}")
    print(f"wrote {OUT}")
