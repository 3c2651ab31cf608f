"""Manufactured solution on the unit layout [0,1] x [-2,1] with H = 1.

Fields are written in glued coordinates: thick layer y in [0,1], plate
y in [-1,0], fluid y in [-2,-1]. The coupling conditions hold for unit
parameters; forcing expressions below are valid for arbitrary parameters
and were derived by symbolic differentiation (the derivation is repeated
independently in the test suite).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ForcingSpec, PhysicalParams

PI = np.pi
TWO_PI = 2 * np.pi


def _T1(t):
    return t + 1.0


def _T2(t):
    return 0.5 * t * t + t + 1.0


@dataclass(frozen=True)
class MmsSolution:
    params: PhysicalParams

    # thick layer
    def p(self, x, y, t):
        return TWO_PI * y * np.cos(TWO_PI * x) * np.cos(y) * _T1(t)

    def grad_p(self, x, y, t):
        c = _T1(t)
        return (-4 * PI ** 2 * y * np.sin(TWO_PI * x) * np.cos(y) * c,
                TWO_PI * np.cos(TWO_PI * x) * (np.cos(y) - y * np.sin(y)) * c)

    def u_b(self, x, y, t):
        k = self.params.kappa_matrix
        gx, gy = self.grad_p(x, y, t)
        return (-(k[0, 0] * gx + k[0, 1] * gy), -(k[1, 0] * gx + k[1, 1] * gy))

    def eta(self, x, y, t):
        return (np.sin(TWO_PI * x) * np.sin(TWO_PI * y) * _T1(t),
                TWO_PI * np.cos(TWO_PI * x) * np.cos(TWO_PI * y) * _T2(t))

    def xi(self, x, y, t):
        return (np.sin(TWO_PI * x) * np.sin(TWO_PI * y) + 0.0 * t,
                TWO_PI * np.cos(TWO_PI * x) * np.cos(TWO_PI * y) * _T1(t))

    def grad_eta(self, x, y, t):
        """((d_x eta_x, d_y eta_x), (d_x eta_y, d_y eta_y))."""
        a, b = _T1(t), _T2(t)
        s2x, c2x = np.sin(TWO_PI * x), np.cos(TWO_PI * x)
        s2y, c2y = np.sin(TWO_PI * y), np.cos(TWO_PI * y)
        return ((TWO_PI * c2x * s2y * a, TWO_PI * s2x * c2y * a),
                (-4 * PI ** 2 * s2x * c2y * b, -4 * PI ** 2 * c2x * s2y * b))

    # plate
    def q(self, x, y, t):
        return np.cos(TWO_PI * x) * np.sin(TWO_PI * y) * _T1(t)

    def u_p(self, x, y, t):
        return -self.params.kappa_p * TWO_PI * np.cos(TWO_PI * x) * np.cos(TWO_PI * y) * _T1(t)

    def w(self, x, t):
        return TWO_PI * np.cos(TWO_PI * x) * _T2(t)

    def v(self, x, t):
        return TWO_PI * np.cos(TWO_PI * x) * _T1(t)

    def Lam(self, x, t):
        return 8 * PI ** 3 * np.cos(TWO_PI * x) * _T2(t)

    def Qbar(self, x, t):
        H = self.params.H
        return (_T1(t) * np.cos(TWO_PI * x)
                * (np.sin(TWO_PI * H) - TWO_PI * H * np.cos(PI * H) ** 2) / (4 * PI ** 2 * H))

    # fluid
    def u(self, x, y, t):
        e = np.exp(-(y + 1.0))
        c = _T1(t)
        return (np.cos(x) * e * c, np.sin(x) * (1.0 - e) * c)

    def grad_u(self, x, y, t):
        e = np.exp(-(y + 1.0))
        c = _T1(t)
        return ((-np.sin(x) * e * c, -np.cos(x) * e * c),
                (np.cos(x) * (1.0 - e) * c, np.sin(x) * e * c))

    def pi(self, x, y, t):
        return 2 * np.sin(x) * np.cos(TWO_PI * y) * _T1(t)

    # ------------------------------------------------------------- forcing
    def F_b(self, x, y, t):
        m = self.params
        a, b = _T1(t), _T2(t)
        s2y, c2y = np.sin(TWO_PI * y), np.cos(TWO_PI * y)
        fx = np.sin(TWO_PI * x) * (
            -4 * PI ** 2 * m.alpha * y * np.cos(y) * a + m.gamma * s2y * a
            + m.lambda_b * s2y * (4 * PI ** 2 * a - 8 * PI ** 3 * b)
            + m.mu_b * s2y * (12 * PI ** 2 * a - 8 * PI ** 3 * b))
        fy = PI * np.cos(TWO_PI * x) * (
            2 * m.alpha * a * (np.cos(y) - y * np.sin(y)) + 2 * m.gamma * b * c2y
            + m.lambda_b * c2y * (8 * PI ** 2 * b - 4 * PI * a)
            + m.mu_b * c2y * (24 * PI ** 2 * b - 4 * PI * a) + 2 * m.rho_b * c2y)
        return fx, fy

    def G_b(self, x, y, t):
        m = self.params
        k = m.kappa_matrix
        a = _T1(t)
        c2x, s2x = np.cos(TWO_PI * x), np.sin(TWO_PI * x)
        cy, sy = np.cos(y), np.sin(y)
        return TWO_PI * (
            m.alpha * np.sin(TWO_PI * y) * c2x * (1 - TWO_PI * a)
            + m.c0 * y * cy * c2x
            + k[0, 0] * 4 * PI ** 2 * a * y * cy * c2x
            + k[0, 1] * 4 * PI * a * s2x * (cy - y * sy)
            + k[1, 1] * a * c2x * (y * cy + 2 * sy))

    def G_p(self, x, y, t):
        m = self.params
        a = _T1(t)
        s2y = np.sin(TWO_PI * y)
        return np.cos(TWO_PI * x) * (4 * PI ** 3 * m.alpha_p * a * (m.H + 2 * y)
                                     + m.c0_p * s2y + 4 * PI ** 2 * m.kappa_p * a * s2y)

    def F_p(self, x, y, t):
        m = self.params
        H, a, b = m.H, _T1(t), _T2(t)
        return np.cos(TWO_PI * x) * (
            32 * PI ** 5 * H ** 3 * m.bendD * b
            + PI * H * m.alpha_p * a * (1 + np.cos(TWO_PI * H))
            + TWO_PI * H * m.gamma_p * b + TWO_PI * H * m.rho_p
            + (1 - m.alpha_p) * a * np.sin(TWO_PI * H)) + 0.0 * y

    def F_f(self, x, y, t):
        m = self.params
        a = _T1(t)
        e = np.exp(-(y + 1.0))
        fx = np.cos(x) * (m.rho_f * e + 2 * a * np.cos(TWO_PI * y))
        fy = np.sin(x) * (-m.rho_f * e + m.mu_f * a + m.rho_f - 4 * PI * a * np.sin(TWO_PI * y))
        return fx, fy


def generate_forcings(mms: MmsSolution) -> ForcingSpec:
    return ForcingSpec(F_b=mms.F_b, G_b=mms.G_b, F_p=mms.F_p, G_p=mms.G_p, F_f=mms.F_f)
