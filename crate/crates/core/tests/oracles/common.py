"""Shared conventions for the oracle scripts.

Spin |0> is up. The emitted photon is |1> (-Z) for spin up and |0> (+Z)
for spin down. Process maps are 16x4: row 4*i + j holds the coefficient of
sigma_i (spin) x sigma_j (photon), column k the input Pauli sigma_k.
"""

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = [I2, X, Y, Z]

# |s> -> |s>|photon>
EMIT = np.zeros((4, 2), dtype=complex)
EMIT[1, 0] = 1.0
EMIT[2, 1] = 1.0


def rotation(axis_angle):
    """exp(-i theta n.sigma / 2) for the rotation vector theta*n."""
    theta = np.linalg.norm(axis_angle)
    if theta == 0.0:
        return I2.copy()
    n = axis_angle / theta
    ns = n[0] * X + n[1] * Y + n[2] * Z
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * ns


def map_from_channel(channel):
    """16x4 map of a linear channel acting on 2x2 operators."""
    m = np.zeros((16, 4))
    for k in range(4):
        out = channel(PAULI[k])
        for i in range(4):
            for j in range(4):
                m[4 * i + j, k] = 0.5 * np.trace(np.kron(PAULI[i], PAULI[j]) @ out).real
    return m


def ideal_map():
    u = np.kron(rotation(np.array([np.pi / 2, 0, 0])), I2) @ EMIT
    return map_from_channel(lambda rho: u @ rho @ u.conj().T)


def choi(m):
    c = np.zeros((8, 8), dtype=complex)
    for k in range(4):
        for i in range(4):
            for j in range(4):
                c += 0.25 * m[4 * i + j, k] * np.kron(PAULI[k].T, np.kron(PAULI[i], PAULI[j]))
    return c


def psd_sqrt(a):
    w, v = np.linalg.eigh(a)
    return (v * np.sqrt(np.where(w > 1e-14, w, 0.0))) @ v.conj().T


def jozsa(rho, sigma):
    s = psd_sqrt(rho)
    return float(np.real(np.trace(psd_sqrt(s @ sigma @ s))) ** 2)
