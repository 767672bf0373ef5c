# Copyright 2026 The airfl Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the K = 8 round-planning fixture by an independent walkthrough.

Every step is redone here from the definitions: contributions, credits,
noise weights, the surviving-cluster count, an exhaustive search over all
device-to-cluster assignments (each scored through the exact dual of the
fixed-partition weighting problem) and the final sort on |h| beta / alpha.
"""

import itertools
import json
import math
import sys

import numpy as np


def partition_value(phi, varpi, clusters):
    """Returns (value, lam) for the best weights under a fixed partition."""
    root = np.sqrt(varpi)
    members = [k for c in clusters for k in c]
    breaks = sorted(set(phi[members]))
    edges = [-math.inf] + breaks + [math.inf]
    best = (math.inf, None)
    for lo, hi in zip(edges[:-1], edges[1:]):
        probe = (lo + hi) / 2 if math.isfinite(lo) and math.isfinite(hi) else (
            hi - 1 if not math.isfinite(lo) else lo + 1)
        qa, qb, qc = 0.0, 1.0, 0.0
        for c in clusters:
            a = sum(phi[k] / root[k] for k in c if phi[k] > probe)
            b = sum(1 / root[k] for k in c if phi[k] > probe)
            qa += b * b / 4
            qb -= a * b / 2
            qc += a * a / 4
        candidates = [x for x in (lo, hi) if math.isfinite(x)]
        if qa > 0:
            star = -qb / (2 * qa)
            if lo <= star <= hi:
                candidates.append(star)
        for lam in candidates:
            g = qa * lam * lam + qb * lam + qc
            if g < best[0]:
                best = (g, lam)
    return best


def recover_alpha(phi, varpi, clusters, lam):
    alpha = np.zeros(len(phi))
    for c in clusters:
        s = sum(max(phi[k] - lam, 0) / math.sqrt(varpi[k]) for k in c)
        for k in c:
            if phi[k] > lam:
                alpha[k] = s / (2 * math.sqrt(varpi[k]))
    return alpha


def set_partitions(items, sizes):
    if not sizes:
        yield []
        return
    first, rest = sizes[0], sizes[1:]
    for combo in itertools.combinations(items, first):
        left = [x for x in items if x not in combo]
        for tail in set_partitions(left, rest):
            yield [list(combo)] + tail


def main(path):
    k_total, block, clusters_total = 8, 2, 4
    h = np.array([0.9 + 0.3j, -0.4 + 0.8j, 1.3 - 0.2j, 0.5 + 0.5j,
                  -0.7 - 0.6j, 0.05 + 0.08j, 0.2 - 1.1j, -1.0 + 0.1j])
    beta = np.array([1.0, 0.8, 0.6, 0.9, 1.2, 1.0, 0.7, 0.5])
    threshold = 0.2
    norm_sq = np.array([1.8, 0.9, 1.4, 4.0, 2.2, 1.1, 4.0, 0.7])
    delta = np.array([0.4, 0.3, 0.5, 0.2, 0.6, 0.3, 0.2, 0.35])
    queues = np.array([0.0, 0.6, 0.1, 0.0, 0.0, 0.9, 0.0, 1.5])
    suspects = [3, 6]
    v, smooth, eta = 1.0, 1.0, 0.1
    noise, clip, p_max = 80.0, 1.0, 1.0

    gain = np.abs(h) * beta
    activated = [k for k in range(k_total) if abs(h[k]) >= threshold]
    trusted = [k for k in activated if k not in suspects]
    gamma = norm_sq - delta ** 2 / (1 - smooth * eta)
    clamped = np.maximum(gamma, 0)
    gamma_bar = clamped / np.mean(clamped[trusted])
    phi = v * gamma + queues * gamma_bar
    varpi = (v * smooth * eta * noise * clip ** 2 /
             (2 * (1 - smooth * eta) * p_max * gain ** 2))
    lost = math.ceil(len(suspects) / block)
    surviving = clusters_total - lost
    n = len(trusted)
    sizes = [block] * (n // block) + ([n % block] if n % block else [])
    assert len(sizes) == surviving

    local_phi = phi[trusted]
    local_varpi = varpi[trusted]
    scored = []
    for part in set_partitions(list(range(n)), sizes):
        value, lam = partition_value(local_phi, local_varpi, part)
        scored.append((-value, part, lam))
    scored.sort(key=lambda t: t[0])
    best_value, best_part, best_lam = -scored[0][0], scored[0][1], scored[0][2]
    runner_up = next(-s[0] for s in scored if -s[0] < best_value - 1e-12)
    local_alpha = recover_alpha(local_phi, local_varpi, best_part, best_lam)
    assert abs(local_alpha.sum() - 1) < 1e-9, local_alpha.sum()
    alpha = np.zeros(k_total)
    alpha[trusted] = local_alpha

    def key(k):
        value = (gain[k] / alpha[k]
                 if alpha[k] > 0 and abs(h[k]) >= threshold else math.inf)
        return (value, 1 if k in suspects else 0, k)

    order = sorted(range(k_total), key=key)
    clusters = [order[i:i + block] for i in range(0, k_total, block)]

    fixture = {
        "inputs": {
            "h_re": h.real.tolist(), "h_im": h.imag.tolist(),
            "beta": beta.tolist(), "threshold": threshold,
            "grad_norm_sq": norm_sq.tolist(), "delta": delta.tolist(),
            "queues": queues.tolist(), "suspects": suspects,
            "cluster_size": block, "num_clusters": clusters_total,
            "assumed_byzantine": len(suspects), "v": v, "smoothness": smooth,
            "eta": eta, "noise_power": noise, "clip_norm": clip,
            "p_max": p_max,
        },
        "expected": {
            "trusted": trusted, "surviving_clusters": surviving,
            "phi": local_phi.tolist(), "varpi": local_varpi.tolist(),
            "objective": best_value, "runner_up_objective": runner_up,
            "alpha": alpha.tolist(), "clusters": clusters,
        },
    }
    with open(path, "w") as f:
        f.write(_HEADER)
        json.dump(fixture, f, indent=2)
        f.write("\n")
    print(json.dumps(fixture["expected"], indent=1))


def _license_header():
    with open(__file__) as f:
        lines = [l for l in f.read().split('"""', 1)[0].splitlines() if l]
    return "".join("//" + l[1:] + "\n" for l in lines) + "\n"


_HEADER = _license_header()


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/plan_k8.json")
