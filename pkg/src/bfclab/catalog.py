"""Named Boolean functions used by tests, sweeps and the desensitization corpus."""

from __future__ import annotations

import numpy as np

from .core import DenseFunction, InvalidInput


def constant_function(n: int, value: int, name=None) -> DenseFunction:
    return DenseFunction(n, 2, 2, np.full(1 << n, value, dtype=np.uint8), name or f"const{value}_{n}")


def or_function(n: int) -> DenseFunction:
    table = (np.arange(1 << n) != 0).astype(np.uint8)
    return DenseFunction(n, 2, 2, table, f"or{n}")


def and_function(n: int) -> DenseFunction:
    table = (np.arange(1 << n) == (1 << n) - 1).astype(np.uint8)
    return DenseFunction(n, 2, 2, table, f"and{n}")


def xor_function(n: int) -> DenseFunction:
    idx = np.arange(1 << n, dtype=np.uint32)
    table = np.zeros(1 << n, dtype=np.uint8)
    for i in range(n):
        table ^= ((idx >> i) & 1).astype(np.uint8)
    return DenseFunction(n, 2, 2, table, f"xor{n}")


def majority_function(n: int) -> DenseFunction:
    if n % 2 == 0:
        raise InvalidInput("majority is defined for odd arity")
    idx = np.arange(1 << n, dtype=np.uint32)
    ones = np.zeros(1 << n, dtype=np.uint8)
    for i in range(n):
        ones += ((idx >> i) & 1).astype(np.uint8)
    return DenseFunction(n, 2, 2, (ones > n // 2).astype(np.uint8), f"maj{n}")


def address_function(a: int) -> DenseFunction:
    """a address bits select one of 2**a data bits."""
    n = a + (1 << a)
    idx = np.arange(1 << n, dtype=np.uint32)
    sel = idx & ((1 << a) - 1)
    table = ((idx >> (a + sel)) & 1).astype(np.uint8)
    return DenseFunction(n, 2, 2, table, f"addr{a}")


def named_corpus(max_arity: int = 5) -> list[DenseFunction]:
    """Small battery of structured functions with arity <= max_arity."""
    fns: list[DenseFunction] = []
    for n in range(2, max_arity + 1):
        fns += [or_function(n), and_function(n), xor_function(n)]
        if n % 2 == 1:
            fns.append(majority_function(n))
    if max_arity >= 3:
        fns.append(address_function(1))
    if max_arity >= 5:
        # two-level trees mixing gate types
        from .constructions import outer_compose

        fns.append(outer_compose(or_function(2), and_function(2)).dense())
        fns.append(outer_compose(and_function(2), or_function(2)).dense())
    return fns
