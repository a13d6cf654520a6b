import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'errorlab.settings')
django.setup()
