"""
Settings manager for LayerAgg defaults.
"""

import os
from typing import Dict, Any, Optional
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


class SettingsManager:
    """Singleton class holding default values for every command."""

    _instance: Optional['SettingsManager'] = None
    _settings: Dict[str, Any] = {}

    def __new__(cls) -> 'SettingsManager':
        if cls._instance is None:
            cls._instance = super(SettingsManager, cls).__new__(cls)
            cls._instance._load_settings()
        return cls._instance

    def get_default_settings(self) -> Dict[str, Any]:
        """Get default settings for all parameters."""
        return {
            # Training
            "epochs": 30,
            "learning_rate": 1e-3,
            "batch_size": 32,
            "seed": 0,
            "optimizer": "adam",
            "adam_beta1": 0.9,
            "adam_beta2": 0.999,
            "adam_eps": 1e-8,

            # Interfaces
            "cls_heads": 4,
            "group_count": 2,

            # Synthetic data
            "synth_n": 2000,
            "synth_layers": 13,
            "synth_frames": 20,
            "synth_dim": 8,
            "synth_margin": 1.0,
            "synth_nuisance": 5.0,
            "synth_noise_collision": 0.1,
            "synth_noise_layer_select": 0.5,
            "synth_signal_layers": (3, 5),
            "synth_train_fraction": 0.8,

            # Verification
            "gradcheck_step": 1e-5,
            "gradcheck_tol": 1e-4,
            "bench_iters": 20,

            ## Logging (loaded from environment variables)
            "log_level": os.getenv("LAYERAGG_LOG_LEVEL", "WARNING"),
            "log_file": os.getenv("LAYERAGG_LOG_FILE", ""),
        }

    def _load_settings(self) -> None:
        """Load settings from defaults and the environment."""
        self._settings = self.get_default_settings()

    def get_setting(self, key: str, default: Any = None) -> Any:
        """Get a specific setting value."""
        return self._settings.get(key, default)

    def get_all_settings(self) -> Dict[str, Any]:
        """Get all settings."""
        return self._settings.copy()

    def reload_settings(self) -> None:
        """Re-read the environment."""
        load_dotenv(override=True)
        self._load_settings()


# Global instance
_settings_manager: Optional[SettingsManager] = None


def get_settings_manager() -> SettingsManager:
    """Get the global settings manager instance."""
    global _settings_manager
    if _settings_manager is None:
        _settings_manager = SettingsManager()
    return _settings_manager


def get_setting(key: str, default: Any = None) -> Any:
    """Get a specific setting value."""
    return get_settings_manager().get_setting(key, default)


def reload_settings() -> None:
    """Reload settings from the environment."""
    get_settings_manager().reload_settings()
