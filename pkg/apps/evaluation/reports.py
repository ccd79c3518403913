"""
Report rendering
JSON payloads and aligned plain-text tables for evaluation output.
"""


def _table(headers, rows):
    cells = [[str(value) for value in row] for row in rows]
    widths = [len(header) for header in headers]
    for row in cells:
        widths = [max(width, len(value)) for width, value in zip(widths, row)]
    lines = ['  '.join(header.ljust(width) for header, width in zip(headers, widths))]
    lines.append('  '.join('-' * width for width in widths))
    for row in cells:
        lines.append('  '.join(value.ljust(width) for value, width in zip(row, widths)))
    return '\n'.join(lines)


def _num(value, digits=4):
    return '-' if value is None else f'{value:.{digits}f}'


def classification_text(report):
    summary = (
        f'accuracy {_num(report.accuracy)}  macro_f1 {_num(report.macro_f1)}  '
        f'weighted_f1 {_num(report.weighted_f1)}  n {report.n}'
    )
    per_class = _table(
        ['tool', 'precision', 'recall', 'f1', 'support'],
        [
            [str(tool), _num(m.precision), _num(m.recall), _num(m.f1), m.support]
            for tool, m in report.per_class.items()
        ],
    )
    ids = [str(tool) for tool in report.labels]
    confusion = _table(
        ['gold \\ predicted'] + ids,
        [[ids[row]] + list(report.confusion[row]) for row in range(len(ids))],
    )
    return '\n\n'.join([summary, per_class, confusion])


def extraction_text(report):
    if report.empty:
        return 'extraction: no samples (pass_rate reported as 0)'
    lines = [f'extraction pass_rate {_num(report.pass_rate)} ({report.passes}/{report.n})']
    if report.per_field_mismatch_counts:
        lines.append(_table(['field', 'mismatches'], sorted(report.per_field_mismatch_counts.items())))
    failed = [outcome for outcome in report.per_sample if not outcome.passed]
    if failed:
        lines.append(_table(
            ['id', 'gold', 'predicted', 'reason'],
            [
                [
                    outcome.id,
                    outcome.gold_tool,
                    outcome.predicted_tool or '-',
                    (outcome.error or {}).get('code') or ', '.join(diff.field for diff in outcome.field_diffs),
                ]
                for outcome in failed
            ],
        ))
    return '\n\n'.join(lines)


def latency_text(report, title='latency'):
    return _table(
        [title, 'n', 'mean_s', 'p50_s', 'p95_s'],
        [['', report.n, _num(report.mean_seconds, 6), _num(report.p50_seconds, 6), _num(report.p95_seconds, 6)]],
    )


def robustness_text(rows):
    """One line per evaluated dataset."""
    return _table(
        ['dataset', 'n', 'accuracy', 'macro_f1', 'weighted_f1', 'mean_classify_s', 'extraction_pass_rate'],
        [
            [
                row['dataset'],
                row['classification']['n'],
                _num(row['classification']['accuracy']),
                _num(row['classification']['macro_f1']),
                _num(row['classification']['weighted_f1']),
                _num(row['classification_latency']['mean_seconds'], 6) if row.get('classification_latency') else '-',
                _num(row['extraction']['pass_rate']) if row.get('extraction') else '-',
            ]
            for row in rows
        ],
    )


def comparison_text(comparison):
    if not comparison.n:
        return 'no queries compared'
    table = _table(
        ['mode', 'n', 'mean_s', 'p50_s', 'p95_s'],
        [
            [
                row.mode,
                row.latency.n,
                _num(row.latency.mean_seconds, 6),
                _num(row.latency.p50_seconds, 6),
                _num(row.latency.p95_seconds, 6),
            ]
            for row in comparison.modes
        ],
    )
    return f'{table}\n\ntool agreement {_num(comparison.agreement_rate)}'
