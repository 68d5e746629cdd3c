"""Independent reference implementations used as test oracles.

Deliberately naive and kept free of the production code paths they check:
the DFT is evaluated from its definition (no FFT), event clustering is a
direct scan with per-gap float comparisons, and gradients come from central
finite differences.
"""

import numpy as np

from fingertip.mlp import loss_and_gradient


def naive_dft_magnitudes(samples, window_size, hop, taper):
    """O(N^2) one-sided DFT modulus per frame, straight from the definition."""
    samples = np.asarray(samples, dtype=np.float64)
    n_frames = (len(samples) - window_size) // hop + 1
    n_bins = window_size // 2 + 1
    out = np.empty((n_frames, n_bins))
    n = np.arange(window_size)
    for f in range(n_frames):
        frame = samples[f * hop : f * hop + window_size] * taper
        for k in range(n_bins):
            phase = np.exp(-2j * np.pi * k * n / window_size)
            out[f, k] = np.abs(np.dot(frame, phase))
    return out


def brute_force_cluster(bits, sample_rate, merge_gap_s, min_duration_s):
    """Scan for runs of ones, merge short gaps, drop short runs.

    Gap and length checks compare durations in seconds: merge when
    gap / sample_rate < merge_gap_s, keep when length / sample_rate >=
    min_duration_s.
    """
    runs = []
    start = None
    for i, b in enumerate(bits):
        if b and start is None:
            start = i
        elif not b and start is not None:
            runs.append([start, i])
            start = None
    if start is not None:
        runs.append([start, len(bits)])

    merged = []
    for run in runs:
        if merged and (run[0] - merged[-1][1]) / sample_rate < merge_gap_s:
            merged[-1][1] = run[1]
        else:
            merged.append(run)

    return [
        (s, e) for s, e in merged if (e - s) / sample_rate >= min_duration_s
    ]


def finite_difference_gradients(model, inputs, targets, loss, epsilon=1e-5, indices=None):
    """Central-difference gradients for selected (layer, kind, flat_index).

    indices is a list of (layer, "w"|"b", flat_index); None checks every
    parameter. Returns (analytic, numeric) arrays in the same order.
    """
    if indices is None:
        indices = []
        for layer, (w, b) in enumerate(zip(model.weights, model.biases)):
            indices += [(layer, "w", i) for i in range(w.size)]
            indices += [(layer, "b", i) for i in range(b.size)]

    _, grads = loss_and_gradient(model, inputs, targets, loss)
    analytic = np.array(
        [
            (grads[layer][0].flat[i] if kind == "w" else grads[layer][1].flat[i])
            for layer, kind, i in indices
        ]
    )

    numeric = np.empty(len(indices))
    for row, (layer, kind, i) in enumerate(indices):
        param = model.weights[layer] if kind == "w" else model.biases[layer]
        original = param.flat[i]
        param.flat[i] = original + epsilon
        plus, _ = loss_and_gradient(model, inputs, targets, loss)
        param.flat[i] = original - epsilon
        minus, _ = loss_and_gradient(model, inputs, targets, loss)
        param.flat[i] = original
        numeric[row] = (plus - minus) / (2 * epsilon)
    return analytic, numeric
