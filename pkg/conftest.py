"""Global pytest configuration file"""

from hypothesis import HealthCheck, settings

# protocol runs are slow per example
settings.register_profile(
    "fpm", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture]
)
settings.load_profile("fpm")


def pytest_configure(config):
    # Set asyncio fixture loop scope
    config.option.asyncio_default_fixture_loop_scope = "function"
