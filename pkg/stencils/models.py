from django.db import models


class BenchResult(models.Model):
    VARIANTS = [('naive', 'Naive'), ('blocked', 'Spatially blocked'), ('pipeline', 'Pipelined'), ('dist', 'Distributed')]
    SYNC_CHOICES = [('barrier', 'Barrier'), ('relaxed', 'Relaxed'), ('', 'None')]
    STORAGE_CHOICES = [('twogrid', 'Two grids'), ('compressed', 'Compressed')]

    variant = models.CharField(max_length=20, choices=VARIANTS)
    nx = models.PositiveIntegerField()
    ny = models.PositiveIntegerField()
    nz = models.PositiveIntegerField()
    teams = models.PositiveIntegerField(default=1)
    team_size = models.PositiveIntegerField(default=1)
    updates_per_thread = models.PositiveIntegerField(default=1)
    d_l = models.PositiveIntegerField(default=1)
    d_u = models.PositiveIntegerField(default=1)
    d_t = models.PositiveIntegerField(default=0)
    sync = models.CharField(max_length=10, choices=SYNC_CHOICES, blank=True)
    storage = models.CharField(max_length=12, choices=STORAGE_CHOICES, default='twogrid')
    sweeps = models.PositiveIntegerField()
    seconds = models.FloatField()
    total_updates = models.BigIntegerField()
    # None when the run was not checked against the oracle
    verified = models.BooleanField(null=True)
    created = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['created', 'id']

    @property
    def rate(self):
        return self.total_updates / self.seconds if self.seconds > 0 else 0.0

    @property
    def mlups(self):
        return self.rate / 1e6

    def __str__(self):
        return f'{self.variant} {self.nx}x{self.ny}x{self.nz}: {self.mlups:.1f} MLUP/s'
