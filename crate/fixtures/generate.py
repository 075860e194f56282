"""Regenerate the frozen fixtures in this directory.

Outputs
  panel_5x8x20.csv          long-format panel, rows shuffled
  panel_5x8x20.expected     dense tensor written independently of the CSV
  flows_3.csv               three-country raw flows
  flows_3.expected          row-stochastic and max-normalized oracles
  flows_table6.csv          raw flows proportional to the published trade table
  flows_abstract_set.csv    same flows with India in place of Indonesia
  synthetic_table6_set.csv  quarterly 2000Q1-2019Q4 panel from a stable global model
  synthetic_abstract_set.csv

Run with `python3 fixtures/generate.py` from the workspace root.
"""

import csv
import os
import random

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
VARIABLES = ["cpi", "emp", "gdp", "mpi", "exp", "imp", "exc", "mny"]
TABLE6_SET = ["China", "Indonesia", "Malaysia", "Singapore", "Vietnam"]
ABSTRACT_SET = ["China", "India", "Malaysia", "Singapore", "Vietnam"]
TABLE6 = [
    [0, 0.7173, 0.9806, 0.6891, 1.0000],
    [0.6844, 0, 0.0726, 0.1330, 0.0219],
    [0.5861, 0.0619, 0, 0.4591, 0.0351],
    [0.8220, 0.1213, 0.7271, 0, 0.0737],
    [0.7179, 0, 0.0198, 0.0101, 0],
]


def path(name):
    return os.path.join(HERE, name)


def write_long(name, countries, variables, periods, values):
    rows = []
    for c, country in enumerate(countries):
        for v, var in enumerate(variables):
            for t, period in enumerate(periods):
                rows.append((country, var, period, repr(float(values[c][v][t]))))
    return rows


def dense_panel():
    rng = random.Random(20240611)
    countries = TABLE6_SET
    periods = [str(y) for y in range(2000, 2020)]
    values = [[[round(rng.uniform(1.0, 500.0), 6) for _ in periods] for _ in VARIABLES] for _ in countries]
    rows = write_long(None, countries, VARIABLES, periods, values)
    rng.shuffle(rows)
    with open(path("panel_5x8x20.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["country", "variable", "date", "value"])
        w.writerows(rows)
    # The loader orders countries and variables by first appearance in the file.
    c_order = list(dict.fromkeys(r[0] for r in rows))
    v_order = list(dict.fromkeys(r[1] for r in rows))
    with open(path("panel_5x8x20.expected"), "w") as f:
        f.write("countries\t" + "\t".join(c_order) + "\n")
        f.write("variables\t" + "\t".join(v_order) + "\n")
        f.write("periods\t" + "\t".join(periods) + "\n")
        for country in c_order:
            for var in v_order:
                c, v = countries.index(country), VARIABLES.index(var)
                f.write(" ".join(repr(float(x)) for x in values[c][v]) + "\n")


def write_flows(name, countries, flows):
    with open(path(name), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["From/To"] + countries)
        for country, row in zip(countries, flows):
            w.writerow([country] + [repr(float(x)) for x in row])


def three_country_flows():
    countries = ["A", "B", "C"]
    flows = [[7.0, 12.5, 3.25], [40.0, 0.0, 10.0], [1.5, 0.5, 99.0]]
    write_flows("flows_3.csv", countries, flows)
    with open(path("flows_3.expected"), "w") as f:
        # Row-stochastic: each off-diagonal entry over its row's off-diagonal sum.
        f.write("row_stochastic\n")
        for i in range(3):
            s = sum(flows[i][j] for j in range(3) if j != i)
            f.write(" ".join(repr(0.0 if i == j else flows[i][j] / s) for j in range(3)) + "\n")
        # Max-normalized: each off-diagonal entry over the largest off-diagonal entry.
        f.write("max_normalized\n")
        m = max(flows[i][j] for i in range(3) for j in range(3) if i != j)
        for i in range(3):
            f.write(" ".join(repr(0.0 if i == j else flows[i][j] / m) for j in range(3)) + "\n")


def table6_flows():
    scale = 2500.0
    flows = [[round(x * scale, 6) for x in row] for row in TABLE6]
    write_flows("flows_table6.csv", TABLE6_SET, flows)
    write_flows("flows_abstract_set.csv", ABSTRACT_SET, flows)
    return flows


def synthetic_panel(flows):
    rng = np.random.default_rng(7)
    n, kv, t_len, burn = 5, 8, 80, 200
    w = np.array(flows, dtype=float)
    w = w / w.sum(axis=1, keepdims=True)
    k = n * kv
    g = np.zeros((k, k))
    h = np.zeros((k, k))
    a0 = np.zeros(k)
    a1 = np.zeros(k)
    for i in range(n):
        psi = np.diag(rng.uniform(0.45, 0.8, kv)) + rng.normal(0, 0.02, (kv, kv)) * (1 - np.eye(kv))
        lam0 = np.diag(rng.uniform(0.05, 0.2, kv))
        lam1 = np.diag(rng.uniform(-0.1, 0.1, kv))
        link = np.zeros((2 * kv, k))
        for v in range(kv):
            link[v, i * kv + v] = 1.0
            for j in range(n):
                if j != i:
                    link[kv + v, j * kv + v] = w[i, j]
        a_i = np.hstack([np.eye(kv), -lam0])
        b_i = np.hstack([psi, lam1])
        g[i * kv:(i + 1) * kv] = a_i @ link
        h[i * kv:(i + 1) * kv] = b_i @ link
        a0[i * kv:(i + 1) * kv] = rng.uniform(0.2, 0.6, kv)
        a1[i * kv:(i + 1) * kv] = rng.uniform(0.0005, 0.003, kv)
    g_inv = np.linalg.inv(g)
    f = g_inv @ h
    assert max(abs(np.linalg.eigvals(f))) < 0.97
    b0, b1 = g_inv @ a0, g_inv @ a1
    x = np.linalg.solve(np.eye(k) - f, b0)
    path_ = []
    for s in range(-burn, t_len):
        tt = max(s, 0)
        x = b0 + b1 * tt + f @ x + g_inv @ rng.normal(0, 0.02, k)
        if s >= 0:
            path_.append(x.copy())
    base = np.array([100.0, 50.0, 1000.0, 100.0, 200.0, 180.0, 10.0, 500.0])
    levels = np.exp(np.array(path_)) * np.tile(base, n) / np.exp(np.array(path_)[0]).mean()
    periods = [f"{y}Q{q}" for y in range(2000, 2020) for q in range(1, 5)]
    for name, countries in (("synthetic_table6_set.csv", TABLE6_SET), ("synthetic_abstract_set.csv", ABSTRACT_SET)):
        with open(path(name), "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["country", "variable", "date", "value"])
            for i, country in enumerate(countries):
                for v, var in enumerate(VARIABLES):
                    for s, period in enumerate(periods):
                        wr.writerow([country, var, period, f"{levels[s, i * kv + v]:.6f}"])


def main():
    dense_panel()
    three_country_flows()
    flows = table6_flows()
    synthetic_panel(flows)


if __name__ == "__main__":
    main()
