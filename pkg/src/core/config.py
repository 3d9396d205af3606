# src/core/config.py
import configparser
import logging
import os

logger = logging.getLogger('tmss')

DEFAULT_CONFIG = {"Settings": {"log_level": "INFO", "max_logs": "10", "journal": "True", "max_workers": "4"}}


class ConfigManager:
    """Application settings kept in an INI file in the user data directory."""

    def __init__(self, config_path):
        self.config_path = config_path
        self.config = configparser.ConfigParser()
        self.load_or_create_config()

    def load_or_create_config(self):
        if not os.path.exists(self.config_path):
            logger.info(f"Settings file not found. Creating default settings at: {self.config_path}")
            self._create_default_config()
        else:
            try:
                self.load_config()
            except (configparser.Error, UnicodeDecodeError, OSError):
                logger.exception("Failed to load settings, possibly corrupted. Regenerating defaults.")
                self.handle_config_error()

    def _create_default_config(self):
        self.config = configparser.ConfigParser()
        for section, values in DEFAULT_CONFIG.items():
            self.config[section] = values
        self.save_config()

    def load_config(self):
        with open(self.config_path, "r", encoding="utf-8") as configfile:
            self.config.read_file(configfile)
        for section, values in DEFAULT_CONFIG.items():
            if not self.config.has_section(section):
                self.config.add_section(section)
            for option, value in values.items():
                if not self.config.has_option(section, option):
                    self.config.set(section, option, value)
        logger.debug(f"Loaded settings file {self.config_path}")

    def save_config(self):
        os.makedirs(os.path.dirname(os.path.abspath(self.config_path)), exist_ok=True)
        with open(self.config_path, "w", encoding="utf-8") as configfile:
            self.config.write(configfile)
        logger.debug("Saved settings file.")

    def handle_config_error(self):
        try:
            if os.path.exists(self.config_path):
                os.remove(self.config_path)
                logger.warning(f"Deleted corrupted settings file: {self.config_path}")
        except OSError as e:
            logger.exception(f"Failed to delete corrupted settings file: {e}")
        self._create_default_config()
        logger.info("Created fresh settings.")

    def get(self, section, option, fallback = None):
        return self.config.get(section, option, fallback=fallback)

    def getboolean(self, section, option, fallback = False):
        try:
            return self.config.getboolean(section, option, fallback=fallback)
        except ValueError:
            logger.warning(f"Invalid boolean for {section}.{option}; using {fallback}")
            return fallback

    def getint(self, section, option, fallback = 0):
        try:
            return self.config.getint(section, option, fallback=fallback)
        except ValueError:
            logger.warning(f"Invalid integer for {section}.{option}; using {fallback}")
            return fallback

    def set(self, section, option, value):
        if not self.config.has_section(section):
            self.config.add_section(section)
        self.config.set(section, option, str(value))

    def has_option(self, section, option):
        return self.config.has_option(section, option)
