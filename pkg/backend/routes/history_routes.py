"""
History API Routes

Flask routes for the transfer history store.
"""

import logging

from flask import Blueprint, jsonify, request

from core.errors import InvalidParameterError
from history.records import decode_lines
from history.sessions import assign_sessions

from .common import error_response, get_context, read_json

logger = logging.getLogger(__name__)

# Create blueprint
history_bp = Blueprint('history', __name__, url_prefix='/api/history')


@history_bp.route('', methods=['GET'])
def get_summary():
    """
    Summary of the history store.

    Response:
    {
        "success": bool,
        "entryCount": int, "sessionCount": int,
        "oldest": epoch, "newest": epoch,
        "featureStats": {...}
    }
    """
    try:
        return jsonify({'success': True, **get_context().store.summary()}), 200
    except Exception as e:
        return error_response(e)


@history_bp.route('', methods=['POST'])
@history_bp.route('/upload', methods=['POST'])
def upload_history():
    """
    Append history lines.

    Accepts a multipart 'file' field or a raw JSONL body. Entries without a
    session_id are bucketed into sessions by time.
    """
    try:
        upload = request.files.get('file')
        if upload is not None:
            text = upload.read().decode('utf-8')
        else:
            text = request.get_data(as_text=True)
        if not text.strip():
            raise InvalidParameterError("no history lines in the request")

        entries = decode_lines(text.splitlines())
        context = get_context()
        if any(not entry.session_id for entry in entries):
            entries = assign_sessions(entries, context.settings.session_window,
                                      taken=context.store.session_ids())
        context.store.append(entries)
        context.history_changed()
        logger.info("Uploaded %d history entries", len(entries))
        return jsonify({
            'success': True,
            'added': len(entries),
            'entryCount': len(context.store),
        }), 200
    except Exception as e:
        return error_response(e)


@history_bp.route('/prune', methods=['POST'])
def prune_history():
    """
    Drop entries collected before a cutoff.

    Request:
    {"before": epoch seconds}
    """
    try:
        data = read_json()
        if 'before' not in data:
            raise InvalidParameterError("'before' is required")
        try:
            cutoff = int(data['before'])
        except (TypeError, ValueError):
            raise InvalidParameterError("'before' must be an epoch in seconds") from None

        context = get_context()
        before = len(context.store)
        context.store.prune_older_than(cutoff)
        removed = before - len(context.store)
        if removed:
            context.history_changed()
        return jsonify({
            'success': True,
            'removed': removed,
            'entryCount': len(context.store),
        }), 200
    except Exception as e:
        return error_response(e)
