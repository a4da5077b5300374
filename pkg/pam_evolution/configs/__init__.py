"""Default configuration presets."""
