"""Consistent UID replacement, patient pseudonyms and per-patient date offsets.

A RemapSession is the only state shared between workers. Fresh values are
derived from a per-session secret and the original value rather than from a
counter, so the result never depends on the order in which files arrive.
"""

from __future__ import annotations

import hashlib
import hmac
import logging
import os
import random
import secrets
import threading
from dataclasses import dataclass
from pathlib import Path

from .dicom.dataset import DataSet, encode_text
from .dicom.validate import is_valid_uid
from .dicom.walk import walk

log = logging.getLogger(__name__)

MAX_UID_LEN = 64
MIN_HEADROOM = 16
_MAX_ATTEMPTS = 64


class SessionClosed(RuntimeError):
    pass


class RootTooLong(ValueError):
    pass


def _check_root(root: str) -> None:
    if not is_valid_uid(root):
        raise RootTooLong(f"root {root!r} is not a valid UID")
    if MAX_UID_LEN - len(root) < MIN_HEADROOM:
        raise RootTooLong(f"root {root!r} leaves fewer than {MIN_HEADROOM} characters")


def _decimal_uid(root: str, digest: bytes) -> str:
    component = str(int.from_bytes(digest, "big"))  # no leading zeros; "0" if all-zero
    return f"{root}.{component}"[:MAX_UID_LEN]


def hash_uid(uid: str, root: str, salt: bytes = b"", attempt: int = 0) -> str:
    """Digest-derived replacement: SHA-256 of salt and uid, decimal, under root."""
    _check_root(root)
    data = salt + uid.encode("ascii", "replace")
    if attempt:
        data += b"#" + str(attempt).encode()
    return _decimal_uid(root, hashlib.sha256(data).digest())


@dataclass
class Offset:
    days: int
    seconds: int = 0


class RemapSession:
    """Scope-bound maps for UIDs, pseudonyms and temporal offsets.

    Every lookup-or-insert runs under one lock, which makes map access
    linearizable when files are processed on several threads.
    """

    def __init__(self, scope_id: str = "collection", mode: str = "MAP", root: str = "2.25",
                 salt: bytes = b"", secret: bytes | None = None, pseudonym_prefix: str = "ANON"):
        if mode not in ("MAP", "HASH"):
            raise ValueError(f"mode must be MAP or HASH, not {mode!r}")
        _check_root(root)
        self.scope_id = scope_id
        self.mode = mode
        self.root = root
        self.salt = salt
        if secret is None:
            # HASH mode is reproducible from the salt alone, pseudonyms and offsets included
            secret = hashlib.sha256(b"deident hash mode\x00" + salt).digest() if mode == "HASH" \
                else secrets.token_bytes(32)
            if mode == "HASH" and not salt:
                log.warning("HASH mode without a salt: replacements are open to dictionary attack")
        self.secret = secret
        self.pseudonym_prefix = pseudonym_prefix
        self.map: dict[str, str] = {}
        self._used: set[str] = set()
        self.pseudonym_map: dict[str, str] = {}
        self._pseudonyms_used: set[str] = set()
        self.offset_map: dict[str, Offset] = {}
        self.invalid_inputs: list[str] = []
        self.hash_collisions = 0
        self.closed = False
        self._lock = threading.RLock()

    # -- keys -----------------------------------------------------------
    def _mac(self, *parts: str) -> bytes:
        msg = "\x1f".join(parts).encode("utf-8", "replace")
        return hmac.new(self.secret, msg, hashlib.sha256).digest()

    def patient_key(self, patient_id: str) -> str:
        """Salted digest of an original patient identifier, safe to persist."""
        return self._mac("patient", patient_id).hex()[:32]

    def _check_open(self) -> None:
        if self.closed:
            raise SessionClosed(self.scope_id)

    # -- UIDs -----------------------------------------------------------
    def _fresh(self, uid: str, attempt: int) -> str:
        return _decimal_uid(self.root, self._mac("uid", uid, str(attempt))[:16])

    def _acceptable(self, uid: str, new: str) -> bool:
        return new != uid and new not in self._used and uid not in new and is_valid_uid(new)

    def remap(self, uid: str) -> str:
        uid = uid.strip().rstrip("\x00")
        with self._lock:
            self._check_open()
            hit = self.map.get(uid)
            if hit is not None:
                return hit
            valid = is_valid_uid(uid)
            if not valid:
                self.invalid_inputs.append(uid)
                log.warning("invalid UID %r replaced with a fresh identifier", uid)
            new = None
            for attempt in range(_MAX_ATTEMPTS):
                if self.mode == "HASH" and valid:
                    cand = hash_uid(uid, self.root, self.salt, attempt)
                    if cand in self._used:
                        self.hash_collisions += 1
                else:
                    cand = self._fresh(uid, attempt)
                if self._acceptable(uid, cand):
                    new = cand
                    break
            if new is None:  # pathological short inputs; keep the last candidate
                new = cand
            self.map[uid] = new
            self._used.add(new)
            return new

    def remap_value(self, value: str) -> str:
        """Remap each component of a backslash-delimited UI value."""
        parts = value.rstrip("\x00 ").split("\\")
        return "\\".join(self.remap(p) if p else p for p in parts)

    # -- pseudonyms -------------------------------------------------------
    def pseudonym(self, patient_id: str) -> str:
        key = self.patient_key(patient_id)
        with self._lock:
            self._check_open()
            hit = self.pseudonym_map.get(key)
            if hit is not None:
                return hit
            attempt = 0
            while True:
                digits = int.from_bytes(self._mac("pseudonym", key, str(attempt))[:8], "big") % 10 ** 12
                cand = f"{self.pseudonym_prefix}{digits:012d}"
                if cand not in self._pseudonyms_used:
                    break
                attempt += 1
            self.pseudonym_map[key] = cand
            self._pseudonyms_used.add(cand)
            return cand

    # -- offsets ----------------------------------------------------------
    def offset(self, patient_id: str, offset_range_days=(-3650, -1), with_seconds: bool = False) -> Offset:
        key = self.patient_key(patient_id)
        with self._lock:
            self._check_open()
            hit = self.offset_map.get(key)
            if hit is not None:
                return hit
            rng = random.Random(int.from_bytes(self._mac("offset", key), "big"))
            lo, hi = offset_range_days
            off = Offset(rng.randint(lo, hi), rng.randint(0, 86399) if with_seconds else 0)
            self.offset_map[key] = off
            return off

    # -- lifecycle --------------------------------------------------------
    def close(self) -> None:
        with self._lock:
            self.closed = True

    def save(self, directory: str | Path) -> None:
        """Write map, pseudonym, offset and key files with owner-only permissions."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        with self._lock:
            _write_private(d / "session.key", self.secret.hex() + "\n")
            lines = [f"#scope_id={self.scope_id}\tmode={self.mode}\troot={self.root}"]
            lines += [f"{k}\t{v}" for k, v in sorted(self.map.items())]
            _write_private(d / "uid_map.tsv", "\n".join(lines) + "\n")
            lines = ["#patient_key\tpseudonym"] + [f"{k}\t{v}" for k, v in sorted(self.pseudonym_map.items())]
            _write_private(d / "pseudonyms.tsv", "\n".join(lines) + "\n")
            lines = ["#patient_key\tdays\tseconds"] + [
                f"{k}\t{v.days}\t{v.seconds}" for k, v in sorted(self.offset_map.items())]
            _write_private(d / "offsets.tsv", "\n".join(lines) + "\n")

    @classmethod
    def load(cls, directory: str | Path, **kwargs) -> "RemapSession":
        """Reopen a saved session; keyword arguments fill in anything missing."""
        d = Path(directory)
        secret = bytes.fromhex((d / "session.key").read_text().strip())
        header = {}
        map_lines: list[str] = []
        if (d / "uid_map.tsv").exists():
            map_lines = (d / "uid_map.tsv").read_text().splitlines()
            if map_lines and map_lines[0].startswith("#"):
                header = dict(f.split("=", 1) for f in map_lines[0][1:].split("\t") if "=" in f)
        for k in ("scope_id", "mode", "root"):
            if k in header:
                kwargs.setdefault(k, header[k])
        session = cls(secret=secret, **kwargs)
        for line in map_lines:
            if line and not line.startswith("#"):
                orig, new = line.split("\t")
                session.map[orig] = new
                session._used.add(new)
        if (d / "pseudonyms.tsv").exists():
            for line in (d / "pseudonyms.tsv").read_text().splitlines():
                if line and not line.startswith("#"):
                    k, v = line.split("\t")
                    session.pseudonym_map[k] = v
                    session._pseudonyms_used.add(v)
        if (d / "offsets.tsv").exists():
            for line in (d / "offsets.tsv").read_text().splitlines():
                if line and not line.startswith("#"):
                    k, days, secs = line.split("\t")
                    session.offset_map[k] = Offset(int(days), int(secs))
        return session


def _write_private(path: Path, text: str) -> None:
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    with os.fdopen(fd, "w") as fh:
        fh.write(text)


def _default_remap_predicate():
    from .rules.actions import Action
    from .rules.table import load_rule_table

    table = load_rule_table()

    def should_remap(tag) -> bool:
        rule = table.lookup(tag)
        return rule is None or rule.baseline is Action.REMAP_UID

    return should_remap


def remap_dataset_uids(ds: DataSet, session: RemapSession, retain_uids: bool = False,
                       should_remap=None) -> DataSet:
    """Replace every transient UI value at any depth; non-transient ones are kept.

    ``should_remap(tag)`` decides which UI elements are transient; by default
    the shipped rule table's REMAP_UID rows (and unlisted UI tags) are.
    """
    if retain_uids:
        return ds.copy()
    if should_remap is None:
        should_remap = _default_remap_predicate()

    def visit(path, el):
        if el.vr != "UI" or el.tag.is_private or not should_remap(el.tag):
            return None
        text = el.raw.decode("latin-1").rstrip("\x00 ")
        if not text:
            return None
        out = el.copy()
        out.value = encode_text("UI", session.remap_value(text))
        return out

    return walk(ds, visit)
