"""Download and cache matrices from the public sparse matrix collection."""

from __future__ import annotations

import hashlib
import io
import os
import socket
import tarfile
import urllib.error
import urllib.request
from pathlib import Path
from typing import Callable

DEFAULT_URL_TEMPLATE = "https://sparse.tamu.edu/MM/{group}/{name}.tar.gz"
CACHE_ENV = "MPSPARSE_CACHE"
URL_ENV = "MPSPARSE_URL_TEMPLATE"

# Groups of the matrices used by the default benchmark sets.
KNOWN_GROUPS = {
    "tub1000": "Bai",
    "nd3k": "ND",
    "qc324": "Bai",
    "qc2534": "Bai",
    "dwg961a": "Bai",
    "dwg961b": "Bai",
    "mhd1280a": "Bai",
    "young1c": "HB",
    "young2c": "HB",
    "young4c": "HB",
    "conf5_0-4x4-10": "QCD",
    "conf5_0-4x4-14": "QCD",
    "conf5_0-4x4-18": "QCD",
    "conf5_0-4x4-22": "QCD",
    "conf5_0-4x4-26": "QCD",
    "conf6_0-4x4-20": "QCD",
    "conf6_0-4x4-30": "QCD",
    "mplate": "Cote",
    "aft02": "Okunbor",
}

COMPLEX_SET = ("qc324", "young1c", "young2c", "young4c", "dwg961a", "dwg961b", "mhd1280a",
               "qc2534", "conf5_0-4x4-10", "conf5_0-4x4-14", "conf5_0-4x4-18",
               "conf5_0-4x4-22", "conf5_0-4x4-26", "conf6_0-4x4-20", "conf6_0-4x4-30",
               "mplate", "aft02")

Transport = Callable[[str], bytes]


class FetchError(RuntimeError):
    """Base class for fetch failures."""


class NetworkError(FetchError):
    """The archive could not be downloaded."""


class UnknownMatrixError(FetchError, KeyError):
    """The name does not resolve to a collection matrix."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class IntegrityError(FetchError):
    """Checksum mismatch or a corrupt/unexpected archive."""


class OfflineError(FetchError):
    """Offline mode was requested and the matrix is not cached."""


def default_cache_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "mpsparse")


def urllib_transport(url: str, timeout: float = 60.0) -> bytes:
    """Fetch ``url`` with urllib, mapping failures to :class:`FetchError`."""
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            return resp.read()
    except urllib.error.HTTPError as exc:
        if exc.code == 404:
            raise UnknownMatrixError(f"{url}: not found (HTTP 404)") from exc
        raise NetworkError(f"{url}: HTTP {exc.code}") from exc
    except (urllib.error.URLError, socket.timeout, OSError) as exc:
        raise NetworkError(f"{url}: {getattr(exc, 'reason', exc)}") from exc


def _index_groups(cache_dir: Path) -> dict:
    """Read ``name -> group`` from an optional ``ssstats.csv`` in the cache."""
    path = cache_dir / "ssstats.csv"
    groups = {}
    if path.is_file():
        for line in path.read_text().splitlines()[2:]:
            parts = line.split(",")
            if len(parts) >= 2:
                groups[parts[1].strip()] = parts[0].strip()
    return groups


def resolve(name: str, cache_dir: Path | None = None) -> tuple[str, str]:
    """Map ``name`` or ``group/name`` to ``(group, name)``."""
    if "/" in name:
        group, _, base = name.partition("/")
        if not group or not base:
            raise UnknownMatrixError(f"malformed matrix name {name!r}")
        return group, base
    if name in KNOWN_GROUPS:
        return KNOWN_GROUPS[name], name
    groups = _index_groups(Path(cache_dir or default_cache_dir()))
    if name in groups:
        return groups[name], name
    raise UnknownMatrixError(
        f"unknown matrix {name!r}; pass it as 'Group/name' or add ssstats.csv to the cache")


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _extract(archive: bytes, name: str) -> bytes:
    try:
        with tarfile.open(fileobj=io.BytesIO(archive), mode="r:*") as tar:
            members = [m for m in tar.getmembers()
                       if m.isfile() and os.path.basename(m.name) == f"{name}.mtx"]
            if not members:
                raise IntegrityError(f"archive has no {name}.mtx member")
            fh = tar.extractfile(members[0])
            return fh.read()
    except (tarfile.TarError, EOFError, OSError) as exc:
        raise IntegrityError(f"cannot extract {name}.mtx: {exc}") from exc


def cached_path(name: str, cache_dir: Path | None = None) -> Path:
    group, base = resolve(name, cache_dir)
    return Path(cache_dir or default_cache_dir()) / group / f"{base}.mtx"


def fetch_matrix(name: str, cache_dir=None, *, offline: bool = False,
                 transport: Transport | None = None, url_template: str | None = None,
                 expected_sha256: str | None = None) -> Path:
    """Return a local path to the Matrix Market file of ``name``.

    A cached copy is used when present (no transport call).  Otherwise the
    collection archive is downloaded, the ``.mtx`` member extracted and
    stored with a ``.sha256`` sidecar that later cache hits verify.

    Parameters
    ----------
    name : str
        Collection name (``"tub1000"``), ``"Group/name"`` or a path to an
        existing ``.mtx`` file.
    cache_dir : path, optional
        Defaults to ``$MPSPARSE_CACHE`` or ``~/.cache/mpsparse``.
    offline : bool
        Fail with :class:`OfflineError` instead of downloading.
    transport : callable, optional
        ``url -> bytes``; defaults to urllib.
    url_template : str, optional
        Format string with ``{group}`` and ``{name}`` fields.
    expected_sha256 : str, optional
        Checksum the downloaded archive must match.

    Raises
    ------
    UnknownMatrixError, NetworkError, IntegrityError, OfflineError
    """
    if os.path.isfile(name):
        return Path(name)
    cache_dir = Path(cache_dir or default_cache_dir())
    group, base = resolve(name, cache_dir)
    target = cache_dir / group / f"{base}.mtx"
    sidecar = target.with_suffix(".mtx.sha256")
    if target.is_file():
        if sidecar.is_file():
            want = sidecar.read_text().split()[0]
            if _sha256(target.read_bytes()) != want:
                raise IntegrityError(f"cached {target} does not match its recorded checksum")
        return target
    if offline:
        raise OfflineError(f"{name} is not cached in {cache_dir} and offline mode is on")

    template = url_template or os.environ.get(URL_ENV) or DEFAULT_URL_TEMPLATE
    url = template.format(group=group, name=base)
    archive = (transport or urllib_transport)(url)
    if expected_sha256 and _sha256(archive) != expected_sha256.lower():
        raise IntegrityError(f"checksum mismatch for {url}")
    payload = _extract(archive, base)

    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_suffix(".mtx.part")
    tmp.write_bytes(payload)
    os.replace(tmp, target)
    sidecar.write_text(f"{_sha256(payload)}  {target.name}\n")
    return target
