"""Matrix products that avoid upcasting large real matrices to complex."""

import numpy as np


def matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if np.isrealobj(A) and np.iscomplexobj(B):
        return (A @ B.real) + 1j * (A @ B.imag)
    return A @ B


def adjoint_matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``A† B``."""
    if np.isrealobj(A):
        return matmul(A.T, B)
    return A.conj().T @ B
