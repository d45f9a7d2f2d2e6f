"""Environment settings, provider credentials and YAML run configs."""
