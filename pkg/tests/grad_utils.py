"""Central finite-difference parameter gradient checks shared by test modules."""

import numpy as np
import torch


def fd_param_check(loss_fn, params, max_coords=40, eps=1e-5, rel_tol=1e-3, seed=0):
    """Compare autograd parameter gradients with central differences.

    loss_fn: () -> scalar tensor, a pure function of `params`.
    params: iterable of double-precision tensors with requires_grad=True.
    Probes up to max_coords random coordinates per parameter tensor.
    """
    params = [p for p in params if p.requires_grad]
    for p in params:
        if p.grad is not None:
            p.grad = None
    loss = loss_fn()
    loss.backward()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for p in params:
        grad = p.grad
        assert grad is not None, "parameter did not receive a gradient"
        flat = p.data.reshape(-1)
        gflat = grad.reshape(-1)
        n = flat.numel()
        coords = rng.choice(n, size=min(max_coords, n), replace=False)
        for idx in coords:
            orig = float(flat[idx])
            flat[idx] = orig + eps
            with torch.no_grad():
                up = float(loss_fn())
            flat[idx] = orig - eps
            with torch.no_grad():
                down = float(loss_fn())
            flat[idx] = orig
            fd = (up - down) / (2 * eps)
            an = float(gflat[idx])
            denom = max(abs(fd), abs(an), 1e-8)
            rel = abs(fd - an) / denom
            worst = max(worst, rel)
            assert rel < rel_tol, f"gradient mismatch: analytic={an:.6e} fd={fd:.6e} rel={rel:.2e}"
    return worst
