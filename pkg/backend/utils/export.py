"""
CSV Export

Timeline columns: t_s, throughput_bps, flows. The online decision log
uses the columns of online.driver.DECISION_COLUMNS.
"""

import csv
import io

from online.driver import DECISION_COLUMNS

TIMELINE_COLUMNS = ('t_s', 'throughput_bps', 'flows')


def _write(rows, columns, path=None):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    writer.writerows(rows)
    text = buffer.getvalue()
    if path is not None:
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
    return text


def timeline_csv(rows, path=None):
    """Write (t, throughput, flows) rows; returns the CSV text"""
    return _write(((round(t, 6), round(thr, 3), flows) for t, thr, flows in rows),
                  TIMELINE_COLUMNS, path)


def decision_log_csv(rows, path=None):
    return _write(rows, DECISION_COLUMNS, path)
