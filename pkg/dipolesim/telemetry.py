"""
OpenTelemetry tracing for simulation runs.

Tracing is off unless DIPOLESIM_ENABLE_TRACING is set; the API's no-op tracer is used
otherwise, so instrumented code pays almost nothing.
"""

import logging
import os
from typing import Any, Dict

from opentelemetry import trace

from . import settings
from .version import get_cached_version

logger = logging.getLogger(__name__)

_configured = False


def get_service_resource_attributes() -> Dict[str, Any]:
    """
    Get minimal service resource attributes.

    Returns:
        Dict[str, Any]: Essential resource attributes for the service
    """
    attributes = {
        "service.name": "dipolesim",
        "service.version": get_cached_version(),
    }

    environment = os.getenv("ENVIRONMENT")
    if environment and environment.lower() in ["production", "staging", "development"]:
        attributes["deployment.environment"] = environment

    return attributes


def configure_tracing() -> bool:
    """
    Configure OpenTelemetry tracing with a console exporter and ratio sampling.

    Returns:
        bool: True if tracing is active after the call, False otherwise
    """
    global _configured
    if _configured:
        return True
    if not settings.ENABLE_TRACING:
        return False

    try:
        from opentelemetry.sdk.resources import Resource
        from opentelemetry.sdk.trace import TracerProvider
        from opentelemetry.sdk.trace.export import BatchSpanProcessor, ConsoleSpanExporter
        from opentelemetry.sdk.trace.sampling import TraceIdRatioBased

        resource = Resource.create(get_service_resource_attributes())
        sampler = TraceIdRatioBased(settings.TRACING_SAMPLING_RATE)

        provider = TracerProvider(resource=resource, sampler=sampler)
        provider.add_span_processor(BatchSpanProcessor(ConsoleSpanExporter()))
        trace.set_tracer_provider(provider)

        _configured = True
        logger.info(f"OpenTelemetry tracing configured with {settings.TRACING_SAMPLING_RATE * 100}% sampling")
        return True

    except Exception as e:
        logger.error(f"Failed to configure OpenTelemetry tracing: {e}")
        return False


def get_tracer(name: str = "dipolesim"):
    """Return a tracer; a no-op tracer when tracing was never configured."""
    return trace.get_tracer(name, get_cached_version())
