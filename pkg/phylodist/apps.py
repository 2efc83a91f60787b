from django.apps import AppConfig


class PhylodistConfig(AppConfig):
    name = 'phylodist'
    verbose_name = 'Phylogenetic tree distances'
