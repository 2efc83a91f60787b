from pathlib import Path

from django.core.management.base import BaseCommand

from phylodist.exceptions import TreeInputError
from phylodist.splits import parse_split_vectors, split_to_tree
from phylodist.tree_model import serialize_newick

from ._errors import exit_codes


class Command(BaseCommand):
    help = 'Decodes split-vector blocks into Newick trees, one per line'

    def add_arguments(self, parser):
        parser.add_argument('input', help='File of split-vector blocks')
        parser.add_argument('--out', help='Output file (default: stdout)')

    def handle(self, *args, **options):
        with exit_codes():
            vectors = parse_split_vectors(Path(options['input']).read_text())
            lines = []
            for block, vector in enumerate(vectors, start=1):
                try:
                    tree = split_to_tree(vector)
                except TreeInputError as e:
                    raise TreeInputError(f"block {block}: {type(e).__name__}: {e}") from e
                lines.append(serialize_newick(tree).decode())
            text = ''.join(f"{line}\n" for line in lines)
            if options['out']:
                Path(options['out']).write_text(text)
            else:
                self.stdout.write(text, ending='')
        if options['out']:
            self.stdout.write(self.style.SUCCESS(f"Decoded {len(lines)} trees to {options['out']}"))
