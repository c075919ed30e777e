"""Component bus.

Registers component factories under symbolic names, connects and
disconnects component instances, replaces a live component while
rebinding every outstanding handle, tracks which components were
connected as dependencies of which, and validates advertised
configuration parameters.

Clients never hold a component instance directly: connect() returns a
ComponentHandle whose target is an indirection slot. Replacing the
component swaps the slot's target (and bumps the handle generation);
disconnecting kills the slot, after which any call through the handle
raises DisconnectedComponent rather than reaching a destroyed instance.
"""

from __future__ import annotations

import importlib
import threading
from dataclasses import dataclass, field

from . import values
from .errors import (
    ContractMismatch,
    DependencyCycle,
    DisconnectedComponent,
    DuplicateActualName,
    FactoryFailure,
    NotConnected,
    UnknownName,
    UnknownParam,
)


@dataclass(frozen=True)
class ParamSpec:
    """An advertised configuration parameter."""

    name: str
    value_type: values.ValueType
    default: object
    range: tuple | None = None
    choices: tuple | None = None
    doc: str = ""

    def __post_init__(self):
        if isinstance(self.value_type, str):
            object.__setattr__(self, "value_type", values.parse_type(self.value_type))
        # defaults must satisfy their own constraints
        normalized = values.check_value(self.default, self.value_type, self.range, self.choices)
        object.__setattr__(self, "default", normalized)

    def check(self, value):
        return values.check_value(value, self.value_type, self.range, self.choices)


@dataclass(frozen=True)
class ComponentDescriptor:
    """Registration record for one component factory.

    actual_name is unique; logical_name and the functional (contract)
    names may be claimed by any number of components. dependencies are
    functional-or-logical names resolved at connect time.
    """

    actual_name: str
    logical_name: str
    functional_names: frozenset[str] = frozenset()
    priority: int = 0
    config_params: tuple[ParamSpec, ...] = ()
    dependencies: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "functional_names", frozenset(self.functional_names))
        object.__setattr__(self, "config_params", tuple(self.config_params))
        object.__setattr__(self, "dependencies", tuple(self.dependencies))

    def param(self, name: str) -> ParamSpec:
        for spec in self.config_params:
            if spec.name == name:
                return spec
        raise UnknownParam(f"{self.actual_name} has no parameter {name!r}")


class _Slot:
    """Indirection target shared by every handle to one connected component."""

    __slots__ = ("actual", "generation")

    def __init__(self, actual: str):
        self.actual = actual
        self.generation = 0


class ComponentHandle:
    """Client-side reference to a connected component.

    Attribute access resolves the current live instance on every call,
    so a handle observes replace() transparently and raises
    DisconnectedComponent once its target has been disconnected.
    """

    def __init__(self, alias: str, slot: _Slot, bus: "Bus"):
        self.alias = alias
        self._slot = slot
        self._bus = bus

    @property
    def generation(self) -> int:
        return self._slot.generation

    @property
    def descriptor(self) -> ComponentDescriptor:
        return self._bus._live(self._slot).descriptor

    def resolve(self):
        """Return the live instance, or raise DisconnectedComponent."""
        return self._bus._live(self._slot).instance

    def __getattr__(self, name):
        if name.startswith("_"):
            raise AttributeError(name)
        return getattr(self.resolve(), name)

    def __repr__(self):
        target = self._slot.actual or "<disconnected>"
        return f"ComponentHandle({self.alias!r} -> {target})"


class _Connection:
    def __init__(self, descriptor, instance, explicit, registered):
        self.descriptor = descriptor
        self.instance = instance
        self.explicit = explicit
        self.registered = registered
        self.deps: set[str] = set()
        self.dependents: set[str] = set()
        self.slot = _Slot(descriptor.actual_name)
        self.params = {p.name: p.default for p in descriptor.config_params}


class Bus:
    """The component kernel. All mutating operations are serialized."""

    def __init__(self):
        self._lock = threading.RLock()
        self._registry: dict[str, tuple[ComponentDescriptor, callable]] = {}
        self._connected: dict[str, _Connection] = {}
        self._aliases: dict[str, str] = {}
        self._pins: dict[str, str] = {}

    # -- registration -------------------------------------------------

    def register(self, descriptor: ComponentDescriptor, factory) -> None:
        with self._lock:
            if descriptor.actual_name in self._registry:
                raise DuplicateActualName(descriptor.actual_name)
            self._registry[descriptor.actual_name] = (descriptor, factory)

    def pin(self, name: str, actual_name: str) -> None:
        """Pin future lookups of ``name`` to one registered component."""
        with self._lock:
            if actual_name not in self._registry:
                raise UnknownName(actual_name)
            self._pins[name] = actual_name

    def list_components(self, functional: str | None = None):
        with self._lock:
            out = []
            for actual in sorted(self._registry):
                descriptor, _ = self._registry[actual]
                if functional is not None and functional not in descriptor.functional_names:
                    continue
                out.append((descriptor, actual in self._connected))
            return out

    # -- name resolution ----------------------------------------------

    def _select(self, name: str) -> str:
        """Pick the actual name for a lookup; pure in (registry, pins)."""
        if name in self._pins:
            return self._pins[name]
        candidates = [
            d for d, _ in self._registry.values()
            if name == d.actual_name or name == d.logical_name or name in d.functional_names
        ]
        if not candidates:
            raise UnknownName(name)
        best = min(candidates, key=lambda d: (-d.priority, d.actual_name))
        return best.actual_name

    def _resolve_connected(self, name: str) -> _Connection:
        if name in self._connected:
            return self._connected[name]
        if name in self._aliases:
            actual = self._aliases[name]
            if actual in self._connected:
                return self._connected[actual]
        matches = [
            c for c in self._connected.values()
            if name == c.descriptor.logical_name or name in c.descriptor.functional_names
        ]
        if not matches:
            raise NotConnected(name)
        matches.sort(key=lambda c: (-c.descriptor.priority, c.descriptor.actual_name))
        return matches[0]

    # -- connect ------------------------------------------------------

    def connect(self, name: str, alias: str | None = None) -> ComponentHandle:
        with self._lock:
            try:
                actual = self._select(name)
            except UnknownName:
                conn = self._connect_unregistered(name)
                return self._make_handle(conn, alias)
            conn = self._connect_actual(actual, explicit=True, stack=())
            return self._make_handle(conn, alias)

    def _make_handle(self, conn: _Connection, alias: str | None) -> ComponentHandle:
        alias = alias or conn.descriptor.logical_name
        self._aliases[alias] = conn.descriptor.actual_name
        return ComponentHandle(alias, conn.slot, self)

    def _connect_actual(self, actual: str, explicit: bool, stack: tuple) -> _Connection:
        if actual in self._connected:
            conn = self._connected[actual]
            if explicit:
                conn.explicit = True
            return conn
        if actual in stack:
            raise DependencyCycle(" -> ".join(stack + (actual,)))
        descriptor, factory = self._registry[actual]
        dep_conns = []
        for dep_name in descriptor.dependencies:
            dep_actual = self._select(dep_name)
            dep_conns.append(self._connect_actual(dep_actual, explicit=False, stack=stack + (actual,)))
        instance = self._build(factory, actual)
        conn = _Connection(descriptor, instance, explicit, registered=True)
        self._connected[actual] = conn
        for dep in dep_conns:
            conn.deps.add(dep.descriptor.actual_name)
            dep.dependents.add(actual)
        self._apply_params(conn, conn.params)
        return conn

    def _connect_unregistered(self, name: str) -> _Connection:
        # a name matching no descriptor can still be connected by actual
        # name if it imports as a module; it advertises nothing
        if name in self._connected:
            conn = self._connected[name]
            conn.explicit = True
            return conn
        try:
            module = importlib.import_module(name)
        except ImportError:
            raise UnknownName(name) from None
        descriptor = ComponentDescriptor(actual_name=name, logical_name=name)
        conn = _Connection(descriptor, module, explicit=True, registered=False)
        self._connected[name] = conn
        return conn

    def _build(self, factory, actual: str):
        try:
            return factory()
        except Exception as exc:
            raise FactoryFailure(f"{actual}: {exc}") from exc

    # -- disconnect ---------------------------------------------------

    def disconnect(self, name: str) -> set[str]:
        with self._lock:
            conn = self._resolve_connected(name)
            removed: set[str] = set()
            self._remove(conn.descriptor.actual_name, removed)
            return removed

    def _remove(self, actual: str, removed: set[str]) -> None:
        conn = self._connected.pop(actual)
        conn.slot.actual = None
        removed.add(actual)
        self._dispose(conn.instance)
        for alias in [a for a, t in self._aliases.items() if t == actual]:
            del self._aliases[alias]
        for dependent_name in list(conn.dependents):
            dependent = self._connected.get(dependent_name)
            if dependent is not None:
                dependent.deps.discard(actual)
        # unloading propagates to dependencies nothing else needs
        for dep_name in list(conn.deps):
            dep = self._connected.get(dep_name)
            if dep is None:
                continue
            dep.dependents.discard(actual)
            if not dep.explicit and not dep.dependents:
                self._remove(dep_name, removed)

    @staticmethod
    def _dispose(instance):
        close = getattr(instance, "close", None)
        if callable(close):
            try:
                close()
            except Exception:
                pass

    # -- replace ------------------------------------------------------

    def replace(self, name: str, replacement: str) -> None:
        with self._lock:
            old = self._resolve_connected(name)
            if replacement not in self._registry:
                raise UnknownName(replacement)
            new_descriptor, factory = self._registry[replacement]
            missing = old.descriptor.functional_names - new_descriptor.functional_names
            if missing:
                raise ContractMismatch(f"{replacement} lacks {sorted(missing)}")
            if replacement == old.descriptor.actual_name:
                return
            if replacement in self._connected:
                raise ContractMismatch(f"{replacement} is already connected")

            # dependency lookups are resolved anew for the replacement
            fresh: list[str] = []
            dep_conns = []
            for dep_name in new_descriptor.dependencies:
                dep_actual = self._select(dep_name)
                if dep_actual == old.descriptor.actual_name:
                    raise DependencyCycle(f"{replacement} depends on the component it replaces")
                already = dep_actual in self._connected
                dep_conns.append(self._connect_actual(dep_actual, explicit=False, stack=(replacement,)))
                if not already:
                    fresh.append(dep_actual)
            try:
                instance = self._build(factory, replacement)
            except FactoryFailure:
                for dep_actual in reversed(fresh):
                    dep = self._connected.get(dep_actual)
                    if dep is not None and not dep.explicit and not dep.dependents:
                        self._remove(dep_actual, set())
                raise

            old_actual = old.descriptor.actual_name
            new_conn = _Connection(new_descriptor, instance, old.explicit, registered=True)
            # existing handles rebind through the old slot
            new_conn.slot = old.slot
            new_conn.slot.actual = replacement
            new_conn.slot.generation += 1
            self._connected[replacement] = new_conn
            for dep in dep_conns:
                new_conn.deps.add(dep.descriptor.actual_name)
                dep.dependents.add(replacement)
            self._apply_params(new_conn, new_conn.params)

            # dependents of the old component now reference the new one
            for dependent_name in list(old.dependents):
                dependent = self._connected.get(dependent_name)
                if dependent is not None:
                    dependent.deps.discard(old_actual)
                    dependent.deps.add(replacement)
                    new_conn.dependents.add(dependent_name)

            # release the old instance and its now-exclusive dependencies
            del self._connected[old_actual]
            self._dispose(old.instance)
            removed: set[str] = set()
            for dep_name in list(old.deps):
                dep = self._connected.get(dep_name)
                if dep is None:
                    continue
                dep.dependents.discard(old_actual)
                if not dep.explicit and not dep.dependents:
                    self._remove(dep_name, removed)
            for alias, target in list(self._aliases.items()):
                if target == old_actual:
                    self._aliases[alias] = replacement
            self._pins[name] = replacement

    # -- configuration ------------------------------------------------

    def configure(self, name: str, assignments: dict) -> None:
        with self._lock:
            conn = self._resolve_connected(name)
            checked = {}
            for key, value in assignments.items():
                spec = conn.descriptor.param(key)
                checked[key] = spec.check(value)
            conn.params.update(checked)
            self._apply_params(conn, checked)

    @staticmethod
    def _apply_params(conn: _Connection, assignments: dict) -> None:
        if not assignments:
            return
        configure = getattr(conn.instance, "configure", None)
        if callable(configure):
            configure(dict(assignments))
            return
        for key, value in assignments.items():
            try:
                setattr(conn.instance, key, value)
            except AttributeError:
                pass

    def params_of(self, name: str) -> dict:
        with self._lock:
            return dict(self._resolve_connected(name).params)

    # -- introspection ------------------------------------------------

    def connected_names(self) -> set[str]:
        with self._lock:
            return set(self._connected)

    def is_connected(self, actual: str) -> bool:
        with self._lock:
            return actual in self._connected

    def aliases(self) -> dict[str, str]:
        with self._lock:
            return dict(self._aliases)

    def dependency_graph(self) -> str:
        """Deterministic dump: one ``A -> B`` line per edge, sorted."""
        with self._lock:
            lines = []
            for actual, conn in self._connected.items():
                for dep in conn.deps:
                    lines.append(f"{actual} -> {dep}")
            return "\n".join(sorted(lines)) + ("\n" if lines else "")

    def _live(self, slot: _Slot) -> _Connection:
        with self._lock:
            if slot.actual is None:
                raise DisconnectedComponent("component has been disconnected")
            return self._connected[slot.actual]
