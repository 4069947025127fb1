"""Subprocess adapter for external predictor backends.

Protocol: newline-delimited JSON over stdin/stdout. Each request is
``{"id": str, "path": str}``; each response ``{"id": str, "score": float}``
with the score in [0, 1]. Closing stdin signals shutdown; the process is
expected to exit 0.
"""

from __future__ import annotations

import json
import subprocess

from blurmm.errors import ProtocolError


def external_predict(paths_by_id: dict[str, str], command) -> dict[str, float]:
    """Send one request per tile and collect scores, matched by id.

    Responses may arrive in any order. Raises ProtocolError for malformed
    lines, out-of-range scores, missing or duplicate ids, or a non-zero
    exit code.
    """
    request_text = "".join(
        json.dumps({"id": tid, "path": str(path)}) + "\n" for tid, path in paths_by_id.items()
    )
    try:
        proc = subprocess.run(
            list(command),
            input=request_text.encode("utf-8"),
            capture_output=True,
            check=False,
        )
    except OSError as exc:
        raise ProtocolError(f"failed to launch {command!r}: {exc}") from exc
    if proc.returncode != 0:
        raise ProtocolError(
            f"predictor exited with code {proc.returncode}: {proc.stderr.decode(errors='replace')!r}"
        )
    scores: dict[str, float] = {}
    for line in proc.stdout.decode("utf-8").splitlines():
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"malformed response line {line!r}: {exc}") from exc
        if not isinstance(obj, dict) or "id" not in obj or "score" not in obj:
            raise ProtocolError(f"response line missing id/score: {line!r}")
        tid = obj["id"]
        score = obj["score"]
        if tid not in paths_by_id:
            raise ProtocolError(f"unknown id in response line: {line!r}")
        if tid in scores:
            raise ProtocolError(f"duplicate id in response line: {line!r}")
        if not isinstance(score, (int, float)) or not 0 <= score <= 1:
            raise ProtocolError(f"score outside [0,1] in response line: {line!r}")
        scores[tid] = float(score)
    missing = set(paths_by_id) - set(scores)
    if missing:
        raise ProtocolError(f"missing responses for ids: {sorted(missing)}")
    return scores
