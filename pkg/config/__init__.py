from .defaults import CONFIG_SCHEMA, PHYSICS, SCHEMA_VERSION, IDEAL, AUTO

__all__ = ['CONFIG_SCHEMA', 'PHYSICS', 'SCHEMA_VERSION', 'IDEAL', 'AUTO']
