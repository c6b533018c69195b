# Generated by Django 6.0.1 on 2026-10-19 10:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="BenchResult",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                (
                    "variant",
                    models.CharField(
                        choices=[
                            ("naive", "Naive"),
                            ("blocked", "Spatially blocked"),
                            ("pipeline", "Pipelined"),
                            ("dist", "Distributed"),
                        ],
                        max_length=20,
                    ),
                ),
                ("nx", models.PositiveIntegerField()),
                ("ny", models.PositiveIntegerField()),
                ("nz", models.PositiveIntegerField()),
                ("teams", models.PositiveIntegerField(default=1)),
                ("team_size", models.PositiveIntegerField(default=1)),
                ("updates_per_thread", models.PositiveIntegerField(default=1)),
                ("d_l", models.PositiveIntegerField(default=1)),
                ("d_u", models.PositiveIntegerField(default=1)),
                ("d_t", models.PositiveIntegerField(default=0)),
                (
                    "sync",
                    models.CharField(
                        blank=True,
                        choices=[("barrier", "Barrier"), ("relaxed", "Relaxed"), ("", "None")],
                        max_length=10,
                    ),
                ),
                (
                    "storage",
                    models.CharField(
                        choices=[("twogrid", "Two grids"), ("compressed", "Compressed")],
                        default="twogrid",
                        max_length=12,
                    ),
                ),
                ("sweeps", models.PositiveIntegerField()),
                ("seconds", models.FloatField()),
                ("total_updates", models.BigIntegerField()),
                ("verified", models.BooleanField(null=True)),
                ("created", models.DateTimeField(auto_now_add=True)),
            ],
            options={
                "ordering": ["created", "id"],
            },
        ),
    ]
