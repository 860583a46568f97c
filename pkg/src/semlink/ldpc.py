"""Rate-1/2 regular (3,6) LDPC code: seeded PEG construction, systematic
encoding and batched normalized min-sum decoding.

Block length 1024 with 512 information bits.  The parity-check matrix is
built by progressive edge growth so short cycles are avoided, then put in
systematic form over GF(2) once at construction time.  The decoder is
vectorized over a batch of blocks, row weight 6 and column weight 3 give
perfectly rectangular message arrays.
"""

from __future__ import annotations

import struct
from collections import deque
from functools import lru_cache

import numpy as np

BLOCK_LEN = 1024
MESSAGE_LEN = 512
_VAR_DEGREE = 3
_CHK_DEGREE = 6


def _peg_edges(n_vars: int, n_chks: int, rng: np.random.Generator):
    """Progressive edge growth for a (3,6)-regular Tanner graph.

    For each new edge of a variable node, a BFS from that node finds the
    check nodes farthest away (or unreached); among those with remaining
    degree budget, the least-loaded one is chosen, ties broken by a seeded
    permutation then index.
    """
    var_adj = [[] for _ in range(n_vars)]
    chk_adj = [[] for _ in range(n_chks)]
    chk_deg = np.zeros(n_chks, dtype=int)
    tiebreak = rng.permutation(n_chks)

    for v in range(n_vars):
        for _ in range(_VAR_DEGREE):
            if not var_adj[v]:
                candidates = np.flatnonzero(chk_deg < _CHK_DEGREE)
            else:
                # BFS over the bipartite graph from v.
                depth = {}
                seen_chk = set()
                frontier = deque([v])
                seen_var = {v}
                level = 0
                while frontier:
                    next_frontier = deque()
                    for node in frontier:
                        for c in var_adj[node]:
                            if c not in depth:
                                depth[c] = level
                                seen_chk.add(c)
                            for v2 in chk_adj[c]:
                                if v2 not in seen_var:
                                    seen_var.add(v2)
                                    next_frontier.append(v2)
                    frontier = next_frontier
                    level += 1
                    if len(seen_chk) == n_chks:
                        break
                unreached = [c for c in range(n_chks)
                             if c not in seen_chk and chk_deg[c] < _CHK_DEGREE]
                if unreached:
                    candidates = np.array(unreached)
                else:
                    attached = set(var_adj[v])
                    max_d = max(depth.values())
                    for d in range(max_d, -1, -1):
                        cand = [c for c, dd in depth.items()
                                if dd == d and chk_deg[c] < _CHK_DEGREE and c not in attached]
                        if cand:
                            candidates = np.array(cand)
                            break
                    else:
                        cand = [c for c in range(n_chks)
                                if chk_deg[c] < _CHK_DEGREE and c not in attached]
                        candidates = np.array(cand)
            best = min(candidates, key=lambda c: (chk_deg[c], tiebreak[c], c))
            var_adj[v].append(best)
            chk_adj[best].append(v)
            chk_deg[best] += 1
    return var_adj, chk_adj


def _gf2_systematic(H: np.ndarray):
    """Row-reduce H over GF(2); return pivot columns and the parity map.

    After elimination H is I on the pivot columns, so a codeword satisfies
    p = P @ u (mod 2) with u on the non-pivot (information) columns.
    """
    H = H.copy()
    m, n = H.shape
    pivots = []
    row = 0
    for col in range(n):
        if row >= m:
            break
        cand = np.flatnonzero(H[row:, col]) + row
        if cand.size == 0:
            continue
        r = cand[0]
        if r != row:
            H[[row, r]] = H[[r, row]]
        mask = H[:, col].astype(bool)
        mask[row] = False
        H[mask] ^= H[row]
        pivots.append(col)
        row += 1
    if row < m:
        raise ValueError("parity-check matrix is rank deficient")
    pivots = np.array(pivots)
    info_cols = np.setdiff1d(np.arange(n), pivots)
    P = H[:, info_cols]  # p = P @ u over GF(2)
    return pivots, info_cols, P


class LdpcCode:
    """(3,6)-regular rate-1/2 LDPC code with systematic encoding."""

    def __init__(self, seed: int = 2024, block_len: int = BLOCK_LEN):
        if block_len % 2 != 0:
            raise ValueError("block length must be even for rate 1/2")
        self.n = block_len
        self.m = block_len // 2
        self.k = block_len - self.m
        self.seed = int(seed)
        rng = np.random.default_rng(np.random.SeedSequence(self.seed))
        attempt = 0
        while True:
            var_adj, chk_adj = _peg_edges(self.n, self.m, rng)
            H = np.zeros((self.m, self.n), dtype=np.uint8)
            for v, checks in enumerate(var_adj):
                H[checks, v] = 1
            try:
                self._pivot_cols, self._info_cols, self._parity_map = _gf2_systematic(H)
                break
            except ValueError:
                attempt += 1
                if attempt > 8:
                    raise
        self.H = H
        # Rectangular edge layout: rows have weight 6, columns weight 3.
        self.row_cols = np.array([sorted(chk_adj[c]) for c in range(self.m)], dtype=np.int64)
        edge_ids = np.arange(self.m * _CHK_DEGREE).reshape(self.m, _CHK_DEGREE)
        col_edges = [[] for _ in range(self.n)]
        for r in range(self.m):
            for j, v in enumerate(self.row_cols[r]):
                col_edges[v].append(edge_ids[r, j])
        self.col_edge_ids = np.array(col_edges, dtype=np.int64)  # (n, 3)
        self.edge_col = self.row_cols.reshape(-1)

    @property
    def rate(self) -> float:
        return 1.0 - self.m / self.n

    def encode(self, message_bits) -> np.ndarray:
        """Encode message blocks; accepts shape (k,) or (B, k)."""
        u = np.atleast_2d(np.asarray(message_bits, dtype=np.uint8))
        if u.shape[1] != self.k:
            raise ValueError(f"message blocks must have length {self.k}")
        parity = (u.astype(np.int64) @ self._parity_map.T.astype(np.int64)) & 1
        cw = np.zeros((u.shape[0], self.n), dtype=np.uint8)
        cw[:, self._info_cols] = u
        cw[:, self._pivot_cols] = parity.astype(np.uint8)
        if np.asarray(message_bits).ndim == 1:
            return cw[0]
        return cw

    def extract_message(self, codewords) -> np.ndarray:
        cw = np.atleast_2d(np.asarray(codewords, dtype=np.uint8))
        out = cw[:, self._info_cols]
        if np.asarray(codewords).ndim == 1:
            return out[0]
        return out

    def syndrome_ok(self, codewords) -> np.ndarray:
        cw = np.atleast_2d(np.asarray(codewords, dtype=np.uint8))
        checks = cw[:, self.row_cols].sum(axis=2) & 1  # (B, m)
        return ~np.any(checks, axis=1)

    def decode(self, llrs, max_iters: int = 50, norm_factor: float = 0.8):
        """Batched normalized min-sum decoding.

        ``llrs`` has shape (n,) or (B, n); positive values favour bit 0.
        Returns (hard_bits, converged) where ``converged`` is True for a
        block iff all parity checks are satisfied.
        """
        L = np.atleast_2d(np.asarray(llrs, dtype=np.float64))
        if L.shape[1] != self.n:
            raise ValueError(f"LLR blocks must have length {self.n}")
        B = L.shape[0]
        hard = (L < 0).astype(np.uint8)
        done = self.syndrome_ok(hard)
        c2v = np.zeros((B, self.m * _CHK_DEGREE), dtype=np.float64)
        result = hard.copy()

        if np.all(done):
            single = np.asarray(llrs).ndim == 1
            return (result[0], done[0]) if single else (result, done)

        active = ~done
        for _ in range(max_iters):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            total = L[idx] + c2v[idx][:, self.col_edge_ids].sum(axis=2)
            v2c = total[:, self.edge_col] - c2v[idx]
            msgs = v2c.reshape(idx.size, self.m, _CHK_DEGREE)
            signs = np.where(msgs < 0, -1.0, 1.0)
            prod_sign = signs.prod(axis=2, keepdims=True)
            mags = np.abs(msgs)
            part = np.partition(mags, 1, axis=2)
            min1 = part[:, :, 0:1]
            min2 = part[:, :, 1:2]
            is_min = mags == min1
            # Exclude self: the minimum sees the second minimum instead.
            ex_mag = np.where(is_min & (np.cumsum(is_min, axis=2) == 1), min2, min1)
            new_c2v = norm_factor * prod_sign * signs * ex_mag
            c2v[idx] = new_c2v.reshape(idx.size, -1)

            total = L[idx] + c2v[idx][:, self.col_edge_ids].sum(axis=2)
            hard_idx = (total < 0).astype(np.uint8)
            result[idx] = hard_idx
            ok = self.syndrome_ok(hard_idx)
            done[idx] |= ok
            active[idx] = ~ok

        single = np.asarray(llrs).ndim == 1
        return (result[0], done[0]) if single else (result, done)

    def save(self, path) -> None:
        """Versioned binary export: header, dimensions, row column indices."""
        with open(path, "wb") as fh:
            fh.write(b"SLPC")
            fh.write(struct.pack("<HIIq", 1, self.n, self.m, self.seed))
            fh.write(self.row_cols.astype("<u4").tobytes())

    @classmethod
    def load(cls, path) -> "LdpcCode":
        with open(path, "rb") as fh:
            magic = fh.read(4)
            if magic != b"SLPC":
                raise ValueError("not a parity-check matrix file")
            version, n, m, seed = struct.unpack("<HIIq", fh.read(18))
            if version != 1:
                raise ValueError(f"unsupported parity file version {version}")
            rows = np.frombuffer(fh.read(m * _CHK_DEGREE * 4), dtype="<u4")
        code = cls.__new__(cls)
        code.n, code.m, code.k, code.seed = n, m, n - m, seed
        code.row_cols = rows.reshape(m, _CHK_DEGREE).astype(np.int64)
        H = np.zeros((m, n), dtype=np.uint8)
        for r in range(m):
            H[r, code.row_cols[r]] = 1
        code.H = H
        code._pivot_cols, code._info_cols, code._parity_map = _gf2_systematic(H)
        edge_ids = np.arange(m * _CHK_DEGREE).reshape(m, _CHK_DEGREE)
        col_edges = [[] for _ in range(n)]
        for r in range(m):
            for j, v in enumerate(code.row_cols[r]):
                col_edges[v].append(edge_ids[r, j])
        code.col_edge_ids = np.array(col_edges, dtype=np.int64)
        code.edge_col = code.row_cols.reshape(-1)
        return code


@lru_cache(maxsize=4)
def default_code(seed: int = 2024) -> LdpcCode:
    """Process-wide cached code instance (construction is not free)."""
    return LdpcCode(seed=seed)


def bsc_llrs(hard_bits, flip_probs) -> np.ndarray:
    """Map hard decisions to LLRs for known per-bit crossover probabilities."""
    bits = np.asarray(hard_bits, dtype=np.float64)
    p = np.clip(np.asarray(flip_probs, dtype=np.float64), 1e-12, 0.5 - 1e-12)
    return (1.0 - 2.0 * bits) * np.log((1.0 - p) / p)
