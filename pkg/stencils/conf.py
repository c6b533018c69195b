from django.conf import settings

DEFAULTS = {
    'DEFAULT_TEAMS': 1,
    'DEFAULT_TEAM_SIZE': 2,
    'DEFAULT_UPDATES': 2,
    'DEFAULT_DL': 1,
    'DEFAULT_DU': 4,
    'DEFAULT_DT': 0,
    'DEFAULT_BLOCK': (120, 8, 8),
    'SPIN_BUDGET': 64,
    'SPIN_TIMEOUT': 60.0,
    'PIN_THREADS': False,
    'RECV_TIMEOUT': 0.05,
    'REPS': 3,
    'VERIFY_MAX_CELLS': 64**3,
    'TOLERANCE': 1e-13,
    'MACHINE': {'M_s': 20.0e9, 'M_s1': 10.0e9, 'M_c': 80.0e9, 'M_s_socket': 18.5e9},
    'NETWORK': {'bandwidth': 3.2e9, 'latency': 1.8e-6, 'node_rate': 2.0e9},
}


def get_setting(name):
    """Look up a STENCILS setting, falling back to the built-in default."""
    overrides = getattr(settings, 'STENCILS', {})
    if name in overrides:
        return overrides[name]
    return DEFAULTS[name]
