import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "treespace.settings")
django.setup()
