from pathlib import Path

from django.core.management.base import BaseCommand

from phylodist.classic_metrics import strict_consensus
from phylodist.pairwise import load_collection
from phylodist.tree_model import serialize_newick

from ._errors import exit_codes


class Command(BaseCommand):
    help = 'Writes the strict consensus of the input trees, with edge weights from the first tree'

    def add_arguments(self, parser):
        parser.add_argument('inputs', nargs='+')
        parser.add_argument('--out', help='Output file (default: stdout)')

    def handle(self, *args, **options):
        with exit_codes():
            loaded = load_collection(options['inputs'])
            consensus = strict_consensus([item.tree for item in loaded])
            text = serialize_newick(consensus).decode() + "\n"
            if options['out']:
                Path(options['out']).write_text(text)
            else:
                self.stdout.write(text, ending='')
        if options['out']:
            self.stdout.write(self.style.SUCCESS(f"Consensus of {len(loaded)} trees written to {options['out']}"))
