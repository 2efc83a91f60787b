from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand

from phylodist.classic_metrics import MAST_MAX_LEAVES
from phylodist.conf import Tolerances
from phylodist.pairwise import (
    FORMATS,
    METRICS,
    RunConfig,
    compute_matrix,
    default_jobs,
    format_flags,
    format_json,
    format_report,
    format_traces,
    format_tsv,
    load_collection,
    parse_class_map,
)

from ._errors import exit_codes


class Command(BaseCommand):
    help = 'Computes the symmetric pairwise distance matrix of the trees in the input files'

    def add_arguments(self, parser):
        parser.add_argument('inputs', nargs='+', help='Files with one Newick tree per line, or split-vector blocks')
        parser.add_argument('--metric', default='rf', choices=METRICS)
        parser.add_argument('--out', help='Write the matrix here instead of stdout; the report goes to OUT.report.json')
        parser.add_argument('--format', dest='output_format', default='tsv', choices=FORMATS)
        parser.add_argument('--jobs', type=int, help='Worker processes (default: settings, then one per core)')
        parser.add_argument('--k', type=int, default=1, choices=(1, 2), help='Exponent of the node distance')
        parser.add_argument('--class-map', help='Cophenetic class assignment, `vertex class` per line')
        parser.add_argument('--cover-tol', type=float)
        parser.add_argument('--ratio-tol', type=float)
        parser.add_argument('--flow-eps', type=float)
        parser.add_argument('--trace', help='Write every geodesic support as JSON lines to this file')

    def handle(self, *args, **options):
        with exit_codes():
            tolerances = Tolerances.from_settings(
                cover=options['cover_tol'],
                ratio=options['ratio_tol'],
                flow_epsilon=options['flow_eps'],
            )
            config = RunConfig(
                metric=options['metric'],
                inputs=tuple(options['inputs']),
                output_format=options['output_format'],
                tolerances=tolerances,
                jobs=options['jobs'] or default_jobs(),
                k=options['k'],
                mast_max_leaves=settings.PHYLODIST.get('MAST_MAX_LEAVES', MAST_MAX_LEAVES),
                class_map=options['class_map'],
                out=options['out'],
                trace=options['trace'],
            )
            loaded = load_collection(config.inputs)
            scopes = parse_class_map(Path(config.class_map).read_text()) if config.class_map else None
            result = compute_matrix([item.tree for item in loaded], config, scopes)

            rendered = format_json(result) if config.output_format == 'json' else format_tsv(result)
            if config.out:
                Path(config.out).write_text(rendered)
                Path(f"{config.out}.report.json").write_text(format_report(result))
            else:
                self.stdout.write(rendered, ending='')
                if result.flagged:
                    self.stderr.write(format_report(result), ending='')
            if config.trace:
                Path(config.trace).write_text(format_traces(result))

        for (i, j), report in result.flagged.items():
            if report.flags:
                self.stderr.write(self.style.WARNING(f"pair ({i}, {j}): {format_flags(report)}"))
        if config.out:
            size = len(loaded)
            self.stdout.write(self.style.SUCCESS(f"Wrote {size}x{size} {config.metric} matrix to {config.out}"))
