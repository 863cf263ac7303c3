from hypothesis import HealthCheck, settings

# Property tests run the same examples every time; failures must be
# reproducible from a plain `pytest` invocation.
settings.register_profile(
    "deterministic",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("deterministic")
