from pathlib import Path
import importlib
import pkgutil
import inspect
from typing import Dict, Type
import logging

logger = logging.getLogger(__name__)

class PluginRegistry:
    """
    Discovers plugin classes in one subpackage by a name attribute.

    Every module of the package except the ignored ones is imported, and each
    class defined there that carries `name_attribute` is registered under
    that attribute's lowercased value.
    """

    def __init__(self, package: str, name_attribute: str, ignore_modules: list[str] | None = None):
        if ignore_modules is None:
            ignore_modules = ['base', '__pycache__']

        self.package = package
        self.name_attribute = name_attribute
        self.registry: Dict[str, Type] = {}
        self._discover(ignore_modules)

    def _discover(self, ignore_modules: list[str]):
        package_dir = Path(__file__).parent / self.package
        if not package_dir.exists():
            raise ImportError(f"Plugin directory not found at {package_dir}")

        for _, module_name, _ in pkgutil.iter_modules([str(package_dir)]):
            if module_name in ignore_modules:
                continue
            try:
                module = importlib.import_module(f'{__package__}.{self.package}.{module_name}')
            except ImportError as e:
                logger.warning(f"Could not import plugin module {module_name}: {e}")
                continue
            self._register_from_module(module)

    def _register_from_module(self, module):
        for _, obj in inspect.getmembers(module, inspect.isclass):
            name = getattr(obj, self.name_attribute, None)
            if name is None or obj.__module__ != module.__name__ or inspect.isabstract(obj):
                continue
            key = name.lower()
            if key in self.registry and self.registry[key] is not obj:
                raise ValueError(f"Duplicate {self.name_attribute} '{key}' in {module.__name__}")
            self.registry[key] = obj

    def names(self) -> list[str]:
        return sorted(self.registry)

    def get(self, name: str) -> Type:
        plugin = self.registry.get(name.lower())
        if plugin is None:
            raise ValueError(f"Unknown {self.package} plugin '{name}'. Available: {self.names()}")
        return plugin

class PluginManager:
    """Registry of ensemble generators (by generator_name) and estimators (by metric_id)."""

    _cache: Dict[str, PluginRegistry] = {}

    def __init__(self):
        if not self._cache:
            PluginManager._cache['ensembles'] = PluginRegistry('ensembles', 'generator_name')
            PluginManager._cache['estimators'] = PluginRegistry('estimators', 'metric_id')
        self.generators = self._cache['ensembles']
        self.estimators = self._cache['estimators']

    def list_generators(self) -> list[str]:
        return self.generators.names()

    def list_estimators(self) -> list[str]:
        return self.estimators.names()

    def get_generator(self, name: str, **params):
        """
        Create a generator instance by name.

        Raises
        ------
        ValueError
            If no generator of that name exists or its parameters are rejected.
        """
        generator_class = self.generators.get(name)
        try:
            return generator_class(**params)
        except TypeError as e:
            raise ValueError(f"Invalid parameters for generator '{name}': {e}") from e

    def get_sized_generator(self, name: str, n: int, /, **params):
        """Create a generator for ensembles of n states; n overrides any size in params."""
        generator_class = self.generators.get(name)
        try:
            return generator_class.sized(n, **params)
        except TypeError as e:
            raise ValueError(f"Invalid parameters for generator '{name}': {e}") from e

    def get_estimator(self, metric_id: str, **options):
        estimator_class = self.estimators.get(metric_id)
        try:
            return estimator_class(**options)
        except TypeError as e:
            raise ValueError(f"Invalid options for estimator '{metric_id}': {e}") from e
