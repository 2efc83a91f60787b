import random
from pathlib import Path

from django.core.management.base import BaseCommand

from phylodist.exceptions import SizeError
from phylodist.tree_model import random_binary_tree, serialize_newick

from ._errors import exit_codes


class Command(BaseCommand):
    help = 'Writes random rooted binary trees with uniform (0,1] edge weights, one Newick per line'

    def add_arguments(self, parser):
        parser.add_argument('--count', type=int, default=10)
        parser.add_argument('--leaves', type=int, default=6)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--out', help='Output file (default: stdout)')

    def handle(self, *args, **options):
        with exit_codes():
            if options['count'] < 1:
                raise SizeError(f"count must be positive, got {options['count']}")
            rng = random.Random(options['seed'])
            lines = [
                serialize_newick(random_binary_tree(options['leaves'], rng)).decode()
                for _ in range(options['count'])
            ]
            text = ''.join(f"{line}\n" for line in lines)
            if options['out']:
                Path(options['out']).write_text(text)
            else:
                self.stdout.write(text, ending='')
        if options['out']:
            self.stdout.write(self.style.SUCCESS(f"Generated {len(lines)} trees on {options['leaves']} leaves"))
