from django.apps import AppConfig

class StencilsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'stencils'
    verbose_name = 'Jacobi stencil engine'

    def ready(self):
        import stencils.signals
