"""Monte Carlo size and power of the unit-root and cointegration tests.

Each row draws ``REPS`` seeded series from one generator and reports how
often the test rejects at 5%, with its binomial standard error.

    python demos/size_and_power.py [REPS]
"""

from __future__ import annotations

import sys

from patentdyn.simulate import SimSpec, monte_carlo

CASES = [
    ("ADF, random walk (size)", SimSpec("RandomWalk", n=300), "adf"),
    ("ADF, AR(1) 0.5 (power)", SimSpec("AR", {"ar": [0.5]}, n=300), "adf"),
    ("KPSS, random walk (power)", SimSpec("RandomWalk", n=300), "kpss"),
    ("KPSS, AR(1) 0.5 (size)", SimSpec("AR", {"ar": [0.5]}, n=300), "kpss"),
    ("EG, cointegrated pair (power)", SimSpec("CointegratedPair", {"a": 1.0, "b": 2.0, "ar": [0.3]}, n=150), "eg"),
    ("Bai-Perron, 3 sd mean shift", SimSpec("MeanBreak", {"means": [0.0, 3.0], "breaks": [100]}, n=200), "breaks"),
]


def main(reps: int) -> None:
    print(f"{'case':34s} {'reject@5%':>10s} {'s.e.':>7s}")
    for label, spec, stat in CASES:
        res = monte_carlo(spec, reps, stat)
        print(f"{label:34s} {res.rejection[0.05]:10.3f} {res.std_error[0.05]:7.3f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 200)
