"""Publication service: per-day snapshots and public parameters over HTTP,
plus a fetching client with byte-level accounting.

Endpoint grammar (read-only, no request bodies, no per-credential query by
design):

    GET /v1/params
    GET /v1/days/{day}/check/segments/{j}
    GET /v1/days/{day}/revocation

The in-process transport and the network transport share one path resolver,
so both return identical bytes for identical requests. Not-found responses
carry an empty body and a machine-readable reason in the metadata map (the
X-Reason header over HTTP).
"""

from __future__ import annotations

import hashlib
import http.client
import os
import re
import threading
import urllib.parse
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional, Tuple

from . import ahibe
from .encoding import b64u_decode, canonical_decode, canonical_encode
from .primitives import sign, verify
from .tables import (
    CheckSegment,
    CheckTableSnapshot,
    CorruptSnapshotError,
    RevocationTableSnapshot,
    TableParams,
    check_snapshot_filename,
    read_snapshot,
    revocation_snapshot_filename,
    snapshot_from_bytes,
    write_snapshot,
)

PARAMS_FILENAME = "params.doc"

ROUTES = (
    "/v1/params",
    "/v1/days/{day}/check/segments/{j}",
    "/v1/days/{day}/revocation",
)


class ResourceNotFound(LookupError):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class PublicParamsDocument:
    """Deployment-lifetime constants: encryption params, table sizing, the
    day-zero epoch and granularity, all signed by the issuer."""

    mpp: ahibe.MasterPublicParams
    table_params: TableParams
    epoch: int
    granularity_seconds: int
    issuer_id: str
    signature: bytes

    def signed_payload(self) -> bytes:
        return canonical_encode(
            {
                "mpp": ahibe.params_to_bytes(self.mpp),
                "table_params": self.table_params.to_record(),
                "epoch": self.epoch,
                "granularity_seconds": self.granularity_seconds,
                "issuer_id": self.issuer_id,
            }
        )

    def verify_signature(self, issuer_public_key: bytes) -> bool:
        return verify(issuer_public_key, self.signed_payload(), self.signature)

    def day_from_timestamp(self, timestamp: int) -> int:
        if timestamp < self.epoch:
            raise ValueError("timestamp precedes the deployment epoch")
        return (timestamp - self.epoch) // self.granularity_seconds

    def to_record(self) -> dict:
        return {
            "mpp": ahibe.params_to_bytes(self.mpp),
            "table_params": self.table_params.to_record(),
            "epoch": self.epoch,
            "granularity_seconds": self.granularity_seconds,
            "issuer_id": self.issuer_id,
            "signature": self.signature,
        }

    def to_bytes(self) -> bytes:
        return canonical_encode(self.to_record())

    @classmethod
    def from_record(cls, rec) -> "PublicParamsDocument":
        return cls(
            mpp=ahibe.params_from_bytes(b64u_decode(rec["mpp"])),
            table_params=TableParams.from_record(rec["table_params"]),
            epoch=rec["epoch"],
            granularity_seconds=rec["granularity_seconds"],
            issuer_id=rec["issuer_id"],
            signature=b64u_decode(rec["signature"]),
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "PublicParamsDocument":
        return cls.from_record(canonical_decode(data))


def make_params_document(
    mpp: ahibe.MasterPublicParams,
    table_params: TableParams,
    epoch: int,
    granularity_seconds: int,
    issuer_id: str,
    signing_key: bytes,
) -> PublicParamsDocument:
    if granularity_seconds < 1:
        raise ValueError("granularity must be positive")
    unsigned = PublicParamsDocument(
        mpp=mpp,
        table_params=table_params,
        epoch=epoch,
        granularity_seconds=granularity_seconds,
        issuer_id=issuer_id,
        signature=b"",
    )
    return PublicParamsDocument(
        mpp=mpp,
        table_params=table_params,
        epoch=epoch,
        granularity_seconds=granularity_seconds,
        issuer_id=issuer_id,
        signature=sign(signing_key, unsigned.signed_payload()),
    )


class PublicationStore:
    """Directory of published artifacts: params.doc plus per-day
    check-<day>.snap / revocation-<day>.snap archives."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._segment_cache = {}

    def params_path(self) -> Path:
        return self.root / PARAMS_FILENAME

    def check_path(self, day: int) -> Path:
        return self.root / check_snapshot_filename(day)

    def revocation_path(self, day: int) -> Path:
        return self.root / revocation_snapshot_filename(day)

    def write_params(self, document: PublicParamsDocument) -> None:
        tmp = self.params_path().with_suffix(".tmp")
        tmp.write_bytes(document.to_bytes())
        os.replace(tmp, self.params_path())

    def read_params(self) -> PublicParamsDocument:
        return PublicParamsDocument.from_bytes(self.params_bytes())

    def params_bytes(self) -> bytes:
        path = self.params_path()
        if not path.exists():
            raise ResourceNotFound("params-not-published")
        return path.read_bytes()

    def publish_check(self, snapshot: CheckTableSnapshot) -> None:
        write_snapshot(snapshot, self.check_path(snapshot.day))
        self._segment_cache = {k: v for k, v in self._segment_cache.items() if k[0] != snapshot.day}

    def publish_revocation(self, snapshot: RevocationTableSnapshot) -> None:
        write_snapshot(snapshot, self.revocation_path(snapshot.day))

    def check_bytes(self, day: int) -> bytes:
        path = self.check_path(day)
        if not path.exists():
            raise ResourceNotFound("unknown-day")
        return path.read_bytes()

    def revocation_bytes(self, day: int) -> bytes:
        path = self.revocation_path(day)
        if not path.exists():
            raise ResourceNotFound("unknown-day")
        return path.read_bytes()

    def segment_bytes(self, day: int, segment_index: int) -> bytes:
        path = self.check_path(day)
        if not path.exists():
            raise ResourceNotFound("unknown-day")
        stamp = path.stat().st_mtime_ns
        key = (day, segment_index, stamp)
        cached = self._segment_cache.get(key)
        if cached is None:
            snapshot = read_snapshot(path)
            if segment_index < 0 or segment_index >= snapshot.params.sigma:
                raise ResourceNotFound("unknown-segment")
            cached = snapshot.segment(segment_index).to_bytes()
            self._segment_cache[key] = cached
        return cached

    def archived_days(self) -> list:
        days = []
        for path in self.root.glob("revocation-*.snap"):
            match = re.fullmatch(r"revocation-(\d+)\.snap", path.name)
            if match:
                days.append(int(match.group(1)))
        return sorted(days)

    def prune(self, current_day: int, retention_days: int) -> None:
        """Drop archives older than the retention window."""
        for day in self.archived_days():
            if day < current_day - retention_days:
                self.check_path(day).unlink(missing_ok=True)
                self.revocation_path(day).unlink(missing_ok=True)


_SEGMENT_RE = re.compile(r"/v1/days/(\d+)/check/segments/(\d+)")
_REVOCATION_RE = re.compile(r"/v1/days/(\d+)/revocation")


def resolve_path(store: PublicationStore, path: str) -> Tuple[int, Optional[str], bytes]:
    """Single route resolver shared by every transport: (status, reason, body)."""
    if "?" in path or "#" in path:
        return 404, "invalid-path", b""
    if path == "/v1/params":
        try:
            return 200, None, store.params_bytes()
        except ResourceNotFound as exc:
            return 404, exc.reason, b""
    match = _SEGMENT_RE.fullmatch(path)
    if match:
        try:
            return 200, None, store.segment_bytes(int(match.group(1)), int(match.group(2)))
        except ResourceNotFound as exc:
            return 404, exc.reason, b""
    match = _REVOCATION_RE.fullmatch(path)
    if match:
        try:
            return 200, None, store.revocation_bytes(int(match.group(1)))
        except ResourceNotFound as exc:
            return 404, exc.reason, b""
    return 404, "unknown-resource", b""


class InProcessTransport:
    """Same contract as the HTTP transport, straight from the store."""

    def __init__(self, store: PublicationStore):
        self.store = store

    def get(self, path: str) -> Tuple[int, Optional[str], bytes]:
        return resolve_path(self.store, path)


class HttpTransport:
    def __init__(self, base_url: str, timeout: float = 10.0):
        parsed = urllib.parse.urlsplit(base_url)
        if parsed.scheme != "http":
            raise ValueError("only plain http is supported")
        self.host = parsed.hostname
        self.port = parsed.port or 80
        self.timeout = timeout

    def get(self, path: str) -> Tuple[int, Optional[str], bytes]:
        conn = http.client.HTTPConnection(self.host, self.port, timeout=self.timeout)
        try:
            conn.request("GET", path)
            response = conn.getresponse()
            body = response.read()
            reason = response.headers.get("X-Reason")
            return response.status, reason, body
        finally:
            conn.close()


@dataclass(frozen=True)
class FetchRecord:
    path: str
    nbytes: int
    day: Optional[int]


class TableClient:
    """Fetches published artifacts, verifying content digests and recording
    every transfer's exact body size."""

    def __init__(self, transport):
        self.transport = transport
        self.log: list = []
        self._params: Optional[PublicParamsDocument] = None
        self._table_cache = {}

    def _get(self, path: str, day: Optional[int]) -> bytes:
        status, reason, body = self.transport.get(path)
        if status != 200:
            raise ResourceNotFound(reason or "not-found")
        self.log.append(FetchRecord(path=path, nbytes=len(body), day=day))
        return body

    def fetch_params(self) -> PublicParamsDocument:
        body = self._get("/v1/params", None)
        return PublicParamsDocument.from_bytes(body)

    def params(self) -> PublicParamsDocument:
        """Cached params document; immutable for the deployment lifetime."""
        if self._params is None:
            self._params = self.fetch_params()
        return self._params

    def prime_params(self, document: PublicParamsDocument) -> None:
        """Install a params document obtained out of band (no fetch logged)."""
        self._params = document

    def fetch_segment(self, day: int, segment_index: int) -> Tuple[CheckSegment, int]:
        body = self._get(f"/v1/days/{day}/check/segments/{segment_index}", day)
        segment = snapshot_from_bytes(body)
        if not isinstance(segment, CheckSegment) or segment.day != day:
            raise CorruptSnapshotError("response is not the requested check segment")
        return segment, len(body)

    def fetch_revocation_table(self, day: int) -> Tuple[RevocationTableSnapshot, int]:
        body = self._get(f"/v1/days/{day}/revocation", day)
        # parsing is cached by content; the transfer is still logged above
        key = hashlib.sha256(body).digest()
        table = self._table_cache.get(key)
        if table is None:
            table = snapshot_from_bytes(body)
            if not isinstance(table, RevocationTableSnapshot) or table.day != day:
                raise CorruptSnapshotError("response is not the requested revocation table")
            self._table_cache = {key: table}  # keep only the latest
        return table, len(body)


class _Handler(BaseHTTPRequestHandler):
    def do_GET(self):  # noqa: N802  (stdlib naming)
        status, reason, body = resolve_path(self.server.store, self.path)
        self.send_response(status)
        if reason:
            self.send_header("X-Reason", reason)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self):  # noqa: N802
        self.send_response(405)
        self.send_header("X-Reason", "read-only")
        self.send_header("Content-Length", "0")
        self.end_headers()

    do_PUT = do_POST
    do_DELETE = do_POST

    def log_message(self, fmt, *args):
        pass  # quiet by default; operators front this with real logging


def serve(state_dir, bind_address: str = "127.0.0.1:0") -> ThreadingHTTPServer:
    """Start the read-only publication server; caller drives serve_forever."""
    store = PublicationStore(state_dir)
    if not store.params_path().exists():
        raise FileNotFoundError(f"{store.params_path()} missing: publish params before serving")
    host, _, port = bind_address.rpartition(":")
    server = ThreadingHTTPServer((host or "127.0.0.1", int(port)), _Handler)
    server.store = store
    return server


def serve_in_thread(state_dir, bind_address: str = "127.0.0.1:0"):
    """Convenience for tests and the simulator: returns (server, base_url)."""
    server = serve(state_dir, bind_address)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address[:2]
    return server, f"http://{host}:{port}"
