import dis
import sys
from contextlib import contextmanager

import mpmath
import numpy as np

mpmath.mp.dps = 60


def mp_z(x1, n1, x2, n2):
    """Pooled two-proportion z statistic in arbitrary precision, straight from its definition."""
    x1, n1, x2, n2 = (mpmath.mpf(v) for v in (x1, n1, x2, n2))
    p = (x1 + x2) / (n1 + n2)
    return (x1 / n1 - x2 / n2) / mpmath.sqrt(p * (1 - p) * (1 / n1 + 1 / n2))


def mp_log10_sf(z):
    return mpmath.log10(mpmath.erfc(mpmath.mpf(z) / mpmath.sqrt(2)) / 2)


def _is_branch(ins):
    return "_IF_" in ins.opname or ins.opname == "FOR_ITER"


@contextmanager
def trace_branches(*funcs):
    """Record the bytecode offsets of `funcs` executed inside the block."""
    codes = {f.__code__: f for f in funcs}
    hit = {f: set() for f in funcs}

    def local(frame, event, arg):
        if event == "opcode":
            hit[codes[frame.f_code]].add(frame.f_lasti)
        return local

    def tracer(frame, event, arg):
        if frame.f_code in codes:
            frame.f_trace_opcodes = True
            return local
        return None

    old = sys.gettrace()
    sys.settrace(tracer)
    try:
        yield hit
    finally:
        sys.settrace(old)


def missing_branches(func, executed):
    """Conditional jumps of `func` with an unexecuted side, as (line, taken?) pairs.

    Each conditional jump has two successors: its jump target and the next
    instruction. Full branch coverage means both were executed.
    """
    ins = list(dis.get_instructions(func))
    missing = []
    line = func.__code__.co_firstlineno
    for k, i in enumerate(ins):
        line = i.starts_line or line
        if not _is_branch(i):
            continue
        if i.argval not in executed:
            missing.append((line, True))
        if ins[k + 1].offset not in executed:
            missing.append((line, False))
    return missing


def newton_logreg(X, y, l2, tol=1e-13, max_iter=200):
    """Reference L2 logistic regression by damped Newton steps on the exact Hessian.

    Minimises mean BCE + l2 / (2 n) * ||w||^2 with an unpenalised intercept and
    returns (params, objective).
    """
    n, d = X.shape
    A = np.hstack([X, np.ones((n, 1))])
    reg = np.full(d + 1, l2 / n)
    reg[-1] = 0.0

    def objective(p):
        z = A @ p
        return float(np.mean(np.logaddexp(0, z) - y * z) + 0.5 * np.sum(reg * p * p))

    p = np.zeros(d + 1)
    for _ in range(max_iter):
        s = 1 / (1 + np.exp(-(A @ p)))
        g = A.T @ (s - y) / n + reg * p
        if np.max(np.abs(g)) < tol:
            break
        H = (A * (s * (1 - s))[:, None]).T @ A / n + np.diag(reg) + 1e-14 * np.eye(d + 1)
        step = np.linalg.solve(H, g)
        t, f0 = 1.0, objective(p)
        while objective(p - t * step) > f0 and t > 1e-10:
            t /= 2
        p = p - t * step
    return p, objective(p)


def finite_difference_errors(model, X, y, eps=1e-6):
    """Per-tensor max |analytic - central difference| / max(|analytic|, |numeric|).

    The step is shrunk below the distance of the nearest hidden pre-activation
    to the ReLU kink, so no perturbation of W1 or b1 moves a unit across it
    and the loss is smooth over every difference taken.
    """
    pre = np.asarray(X @ model.W1) + model.b1
    margin = np.min(np.abs(pre)) / (2 * max(1.0, np.max(np.abs(X))))
    eps = min(eps, margin)
    _, grads = model.loss_and_grads(X, y)
    errors = []
    for p, g in zip(model.params, grads):
        num = np.zeros_like(p)
        flat, nflat = p.reshape(-1), num.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + eps
            up = model.loss(X, y)
            flat[i] = old - eps
            down = model.loss(X, y)
            flat[i] = old
            nflat[i] = (up - down) / (2 * eps)
        scale = max(np.max(np.abs(g)), np.max(np.abs(num)), 1e-12)
        errors.append(float(np.max(np.abs(g - num)) / scale))
    return errors
