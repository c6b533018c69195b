import logging

from django.db.models.signals import post_save
from django.dispatch import receiver

from .models import BenchResult

logger = logging.getLogger(__name__)


@receiver(post_save, sender=BenchResult)
def log_recorded_result(sender, instance, created, **kwargs):
    if created:
        logger.info('recorded result %d: %s (verified: %s)', instance.pk, instance, instance.verified)
