from django.apps import AppConfig


class ErrorModelConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'errormodel'
    verbose_name = 'Measurement error models'
