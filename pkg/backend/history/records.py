"""
History Record Codec

One JSON object per line with a fixed field order. Decoding reports the
line number and the offending field.
"""

import json
import math
from typing import List

from core.errors import HistoryParseError, HistoryValidationError, InvalidParameterError
from core.types import ChunkType, HistoryEntry, NetworkProfile, ParamTriple


RECORD_FIELDS = (
    'source',
    'destination',
    'bandwidth_bps',
    'rtt_s',
    'buffer_bytes',
    'chunk_type',
    'avg_file_size_bytes',
    'file_count',
    'cc',
    'p',
    'pp',
    'throughput_bps',
    'collected_at',
    'session_id',
)


def entry_to_record(entry: HistoryEntry) -> dict:
    """Field-ordered dict for one entry"""
    return {
        'source': entry.source,
        'destination': entry.destination,
        'bandwidth_bps': entry.network.bandwidth,
        'rtt_s': entry.network.rtt,
        'buffer_bytes': entry.network.buffer_size,
        'chunk_type': entry.chunk_type.value,
        'avg_file_size_bytes': entry.avg_file_size,
        'file_count': entry.file_count,
        'cc': entry.params.cc,
        'p': entry.params.p,
        'pp': entry.params.pp,
        'throughput_bps': entry.throughput,
        'collected_at': entry.collected_at,
        'session_id': entry.session_id,
    }


def encode_line(entry: HistoryEntry) -> str:
    return json.dumps(entry_to_record(entry), ensure_ascii=False)


def _text(record, name, line_no, default=None):
    value = record.get(name, default)
    if value is None:
        raise HistoryParseError(line_no, name)
    if not isinstance(value, str):
        raise HistoryParseError(line_no, name, f"expected a string, got {value!r}")
    return value


def _number(record, name, line_no):
    value = record.get(name)
    if value is None:
        raise HistoryParseError(line_no, name)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise HistoryParseError(line_no, name, f"expected a number, got {value!r}")
    return value


def _integer(record, name, line_no):
    value = _number(record, name, line_no)
    if isinstance(value, float):
        if not value.is_integer():
            raise HistoryParseError(line_no, name, f"expected an integer, got {value!r}")
        value = int(value)
    return value


def record_to_entry(record, line_no=0) -> HistoryEntry:
    """
    Decode one record dict.

    A missing session_id is accepted (third-party logs); it decodes as an
    empty string and can be filled in by assign_sessions.
    """
    if not isinstance(record, dict):
        raise HistoryParseError(line_no, 'record', "expected a JSON object")

    source = _text(record, 'source', line_no)
    destination = _text(record, 'destination', line_no)

    try:
        network = NetworkProfile(
            bandwidth=float(_number(record, 'bandwidth_bps', line_no)),
            rtt=float(_number(record, 'rtt_s', line_no)),
            buffer_size=float(_number(record, 'buffer_bytes', line_no)),
        )
    except InvalidParameterError as exc:
        raise HistoryParseError(line_no, 'network', str(exc)) from None

    try:
        chunk_type = ChunkType.from_label(_text(record, 'chunk_type', line_no))
    except InvalidParameterError as exc:
        raise HistoryParseError(line_no, 'chunk_type', str(exc)) from None

    avg_file_size = float(_number(record, 'avg_file_size_bytes', line_no))
    file_count = _integer(record, 'file_count', line_no)

    values = {name: _integer(record, name, line_no) for name in ('cc', 'p', 'pp')}
    try:
        params = ParamTriple(**values)
    except InvalidParameterError as exc:
        raise HistoryParseError(line_no, 'params', str(exc)) from None

    throughput = float(_number(record, 'throughput_bps', line_no))
    collected_at = _integer(record, 'collected_at', line_no)
    session_id = _text(record, 'session_id', line_no, default='')

    try:
        return HistoryEntry(
            source=source,
            destination=destination,
            network=network,
            chunk_type=chunk_type,
            avg_file_size=avg_file_size,
            file_count=file_count,
            params=params,
            throughput=throughput,
            collected_at=collected_at,
            session_id=session_id,
        )
    except HistoryValidationError as exc:
        field = 'throughput_bps'
        if 'file_count' in str(exc):
            field = 'file_count'
        elif 'avg_file_size' in str(exc):
            field = 'avg_file_size_bytes'
        raise HistoryParseError(line_no, field, str(exc)) from None


def decode_line(line, line_no=0) -> HistoryEntry:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise HistoryParseError(line_no, 'record', f"not valid JSON ({exc.msg})") from None
    return record_to_entry(record, line_no)


def decode_lines(lines) -> List[HistoryEntry]:
    """Decode an iterable of history lines, skipping blank ones"""
    return [
        decode_line(line, line_no)
        for line_no, line in enumerate(lines, start=1)
        if line.strip()
    ]
