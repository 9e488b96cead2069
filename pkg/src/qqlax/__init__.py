"""Numerical verification library for qq-character factorization identities
and the elliptic Calogero-Moser / Ruijsenaars-Schneider Lax constructions."""

__version__ = "0.1.0"
