#!/usr/bin/env python3
"""Regenerate the Adult-shaped and COMPAS-shaped CSV fixtures.

The fixtures mimic the column layout of the public UCI Adult and ProPublica
two-year recidivism files so the pipeline can be exercised offline. Values are
drawn from a fixed seed; rerunning the script reproduces the files exactly.
"""
import math
import random
import sys
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates" / "core" / "tests" / "fixtures"


def sigmoid(z):
    return 1.0 / (1.0 + math.exp(-z))


def adult(rng, rows=600):
    lines = ["age,workclass,education-num,marital-status,race,sex,hours-per-week,income"]
    races = ["White"] * 6 + ["Black"] * 3 + ["Asian-Pac-Islander"]
    for _ in range(rows):
        race = rng.choice(races)
        age = max(17, min(90, int(rng.gauss(39, 12))))
        edu = max(1, min(16, int(round(rng.gauss(10.5 if race == "White" else 9.5, 2.5)))))
        hours = max(1, min(99, int(round(rng.gauss(41, 11)))))
        z = -7.2 + 0.05 * age + 0.35 * edu + 0.03 * hours + (0.4 if race == "White" else 0.0)
        income = ">50K" if rng.random() < sigmoid(z) else "<=50K"
        workclass = rng.choice(["Private", "Private", "Self-emp-not-inc", "Local-gov", "?"])
        marital = rng.choice(["Married-civ-spouse", "Never-married", "Divorced"])
        sex = rng.choice(["Male", "Female"])
        lines.append(f"{age},{workclass},{edu},{marital},{race},{sex},{hours},{income}")
    return "\n".join(lines) + "\n"


def compas(rng, rows=1200):
    lines = ["id,sex,age,race,priors_count,c_charge_degree,two_year_recid"]
    races = ["African-American"] * 5 + ["Caucasian"] * 4 + ["Hispanic", "Other"]
    for i in range(rows):
        race = rng.choice(races)
        age = max(18, min(70, int(rng.gauss(33, 10))))
        lam = 2.8 if race == "African-American" else 2.0
        priors = min(30, int(rng.expovariate(1.0 / lam)))
        degree = rng.choice(["F", "F", "M"])
        z = -0.3 - 0.055 * (age - 18) + 0.45 * priors + (0.25 if degree == "F" else 0.0)
        recid = 1 if rng.random() < sigmoid(z) else 0
        sex = rng.choice(["Male", "Male", "Male", "Female"])
        lines.append(f"{i + 1},{sex},{age},{race},{priors},{degree},{recid}")
    return "\n".join(lines) + "\n"


def main():
    rng = random.Random(20190127)
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "adult_fixture.csv").write_text(adult(rng))
    (OUT / "compas_fixture.csv").write_text(compas(rng))
    return 0


if __name__ == "__main__":
    sys.exit(main())
