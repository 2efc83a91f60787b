from pathlib import Path

from django.core.management.base import BaseCommand

from phylodist.pairwise import load_trees
from phylodist.splits import encode, format_split_vector

from ._errors import exit_codes

HEADER = """\
# split vectors, one block per input tree
# only internal edges with positive weight are encoded
# decoding restores leaf edges with weight 1
"""


class Command(BaseCommand):
    help = 'Encodes a file of Newick trees as sparse split vectors'

    def add_arguments(self, parser):
        parser.add_argument('input', help='File with one Newick tree per line')
        parser.add_argument('--out', help='Output file (default: stdout)')
        parser.add_argument('--explicit', action='store_true', help='Write splits as {a,b,c} blocks instead of indices')

    def handle(self, *args, **options):
        with exit_codes():
            loaded = load_trees(options['input'])
            blocks = [HEADER]
            for item in loaded:
                blocks.append(f"# {item.source}\n")
                blocks.append(format_split_vector(encode(item.tree), explicit=options['explicit']))
            text = ''.join(blocks)
            if options['out']:
                Path(options['out']).write_text(text)
            else:
                self.stdout.write(text, ending='')
        if options['out']:
            self.stdout.write(self.style.SUCCESS(f"Encoded {len(loaded)} trees to {options['out']}"))
