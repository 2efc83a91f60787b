from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from phylodist.exceptions import LabelSetMismatch, TreeInputError
from phylodist.pairwise import content_lines, is_vector_text
from phylodist.splits import parse_split_vectors, split_to_tree
from phylodist.tree_model import parse_newick

from ._errors import INPUT_ERROR, exit_codes


class Command(BaseCommand):
    help = 'Checks every tree of a file and reports one diagnosis per entry'

    def add_arguments(self, parser):
        parser.add_argument('input', help='File with one Newick tree per line, or split-vector blocks')

    def handle(self, *args, **options):
        with exit_codes():
            text = Path(options['input']).read_text()
            entries = self._vector_entries(text) if is_vector_text(text) else self._newick_entries(text)

        first_failure = None
        n = None
        for where, build in entries:
            try:
                tree = build()
                if n is not None and tree.n != n:
                    raise LabelSetMismatch(f"{tree.n} leaves where earlier trees have {n}")
                n = tree.n if n is None else n
            except TreeInputError as e:
                diagnosis = f"{where}: {type(e).__name__}: {e}"
                self.stdout.write(self.style.ERROR(diagnosis))
                first_failure = first_failure or diagnosis
                continue
            shape = "binary" if tree.is_binary else "multifurcating"
            self.stdout.write(f"{where}: OK ({tree.n} leaves, {shape})")

        if first_failure:
            raise CommandError(first_failure, returncode=INPUT_ERROR)
        self.stdout.write(self.style.SUCCESS(f"All {len(entries)} trees are valid"))

    def _newick_entries(self, text):
        return [(f"line {line_no}", lambda line=line: parse_newick(line)) for line_no, line in content_lines(text)]

    def _vector_entries(self, text):
        vectors = parse_split_vectors(text)
        return [(f"block {k}", lambda v=v: split_to_tree(v)) for k, v in enumerate(vectors, start=1)]
