# src/utils.py
import numpy as np


def format_coefficient(value: complex) -> str:
    """
    Compact rendering for Pauli coefficients:
    - real:    "-1.414"
    - complex: "(0.5+0.5j)"
    """
    if abs(value.imag) < 1e-12:
        return f"{value.real:.6g}"
    if abs(value.real) < 1e-12:
        return f"{value.imag:.6g}j"
    return f"({value.real:.6g}{value.imag:+.6g}j)"


def embed_operator(op: np.ndarray, qubits, width: int) -> np.ndarray:
    """Dense 2^width matrix acting as `op` on `qubits` (in that order)."""
    qubits = list(qubits)
    k = len(qubits)
    rest = [q for q in range(width) if q not in qubits]
    full = np.kron(op, np.eye(2 ** (width - k), dtype=complex))
    # full acts on the wire order qubits + rest; permute back to 0..width-1
    order = qubits + rest
    tensor = full.reshape([2] * (2 * width))
    inverse = np.argsort(order)
    axes = list(inverse) + [width + i for i in inverse]
    return tensor.transpose(axes).reshape(2**width, 2**width)


def wrap_angle(angle: float) -> float:
    """Map an angle into (-pi, pi]."""
    wrapped = (angle + np.pi) % (2 * np.pi) - np.pi
    if wrapped <= -np.pi + 1e-15:
        wrapped += 2 * np.pi
    return float(wrapped)
