"""
Carga y validación de la configuración de ejecución (INI).
"""

import configparser
import dataclasses
import hashlib
import io
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from config.defaults import CONFIG_SCHEMA, SCHEMA_VERSION, IDEAL, AUTO
from hardware.device_model import (
    CurveKind, NoiseSpec, QuantizerSpec, ResponseCurve, VariationSpec
)
from .errors import ConfigError, FormatError

logger = logging.getLogger(__name__)

# (sección, clave) -> nombre del campo en RunConfig
FIELD_NAMES = {
    (section, key): ('noise_enabled' if (section, key) == ('noise', 'enabled') else key)
    for section, keys in CONFIG_SCHEMA.items()
    for key in keys
}

COMMAND_SECTION = 'command'
OUTPUT_DIR_KEY = ('run', 'output_dir')

_BOOL_WORDS = {
    '1': True, 'yes': True, 'true': True, 'on': True,
    '0': False, 'no': False, 'false': False, 'off': False,
}


@dataclass(frozen=True)
class CommandRecord:
    """
    Subcomando y argumentos propios de una ejecución, guardados en la
    sección [command] de la configuración resuelta.

    Los valores se guardan en JSON para conservar listas, booleanos y None.
    """
    name: str
    arguments: Tuple[Tuple[str, str], ...] = ()

    @classmethod
    def from_values(cls, name: str, values: Mapping[str, Any]) -> 'CommandRecord':
        arguments = tuple(sorted((key, json.dumps(value, sort_keys=True)) for key, value in values.items()))
        return cls(name=name, arguments=arguments)

    def values(self) -> Dict[str, Any]:
        return {key: json.loads(text) for key, text in self.arguments}

    def to_section(self) -> Dict[str, str]:
        section = {'name': self.name}
        section.update(dict(self.arguments))
        return section


@dataclass(frozen=True)
class RunConfig:
    """
    Configuración resuelta de una ejecución.

    Los campos cuantizador aceptan None con el significado 'ideal' (bits)
    o 'auto' (fondo de escala).
    """
    n: int
    p0: float
    seed: int
    slm_c2: float
    slm_c1: float
    slm_c0: float
    pd_c2: float
    pd_c1: float
    pd_c0: float
    variation: float
    per_coefficient_variation: bool
    dac_bits: Optional[int]
    adc_bits: Optional[int]
    adc_full_scale: Optional[float]
    sigma: float
    noise_enabled: bool
    repeats: int
    lut_points: int
    jobs: int
    output_dir: str
    hidden: int
    epochs: int
    batch: int
    lr: float
    train_limit: int
    test_limit: int
    blobs_k: int
    blobs_n: int
    blobs_spread: float
    blobs_epochs: int
    command: Optional[CommandRecord] = None

    def slm_curve(self) -> ResponseCurve:
        return ResponseCurve(self.slm_c2, self.slm_c1, self.slm_c0, CurveKind.TRANSMISSION)

    def pd_curve(self) -> ResponseCurve:
        return ResponseCurve(self.pd_c2, self.pd_c1, self.pd_c0, CurveKind.RESPONSIVITY)

    def variation_spec(self) -> VariationSpec:
        return VariationSpec(p=self.variation, per_coefficient=self.per_coefficient_variation)

    def quantizer(self) -> QuantizerSpec:
        return QuantizerSpec(
            dac_bits=self.dac_bits,
            adc_bits=self.adc_bits,
            adc_full_scale=self.adc_full_scale,
        )

    def noise_spec(self) -> NoiseSpec:
        return NoiseSpec(sigma=self.sigma, enabled=self.noise_enabled)

    def replace(self, **changes) -> 'RunConfig':
        """Copia con campos sustituidos (revalidada contra el esquema)."""
        values = {name: getattr(self, name) for name in FIELD_NAMES.values()}
        values.update(changes)
        return ConfigLoader().from_fields(values).with_command(self.command)

    def with_command(self, command: Optional[CommandRecord]) -> 'RunConfig':
        return dataclasses.replace(self, command=command)

    def to_ini(self, include_command: bool = True, include_output_dir: bool = True) -> str:
        """Serializa la configuración resuelta como texto INI determinista."""
        parser = configparser.ConfigParser(interpolation=None)
        parser['meta'] = {'schema_version': str(SCHEMA_VERSION)}
        for section, keys in CONFIG_SCHEMA.items():
            parser[section] = {}
            for key, spec in keys.items():
                if (section, key) == OUTPUT_DIR_KEY and not include_output_dir:
                    continue
                value = getattr(self, FIELD_NAMES[(section, key)])
                parser[section][key] = _format_value(value, spec)
        if include_command and self.command is not None:
            parser[COMMAND_SECTION] = self.command.to_section()
        buffer = io.StringIO()
        parser.write(buffer)
        return buffer.getvalue()

    def digest(self) -> str:
        """
        Huella sha256 de la configuración del experimento.

        No depende del directorio de salida ni del subcomando, así que dos
        ejecuciones iguales en directorios distintos comparten huella.
        """
        text = self.to_ini(include_command=False, include_output_dir=False)
        return hashlib.sha256(text.encode('utf-8')).hexdigest()


def _format_value(value: Any, spec: dict) -> str:
    if value is None:
        return AUTO if AUTO in spec.get('allow', []) else IDEAL
    if spec['type'] == 'bool':
        return 'true' if value else 'false'
    if spec['type'] == 'float':
        return repr(float(value))
    return str(value)


class ConfigLoader:
    """
    Carga archivos INI de configuración y los valida contra CONFIG_SCHEMA.

    Las claves desconocidas se rechazan; los overrides (flags de la CLI) se
    aplican después del archivo y antes de la validación final.
    """

    def __init__(self, schema: Mapping[str, Mapping[str, dict]] = CONFIG_SCHEMA):
        self.schema = schema

    def load(self, path: Optional[str] = None,
             overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
        """
        Carga la configuración.

        Args:
            path: Ruta del archivo INI (None usa solo los valores por defecto)
            overrides: Diccionario 'seccion.clave' -> valor

        Returns:
            RunConfig validada, con el subcomando de la sección [command] si
            el archivo la trae

        Raises:
            ConfigError: Si el esquema no se cumple o [command] es inválida
            FormatError: Si el archivo no existe o no es INI válido
        """
        raw: Dict[Tuple[str, str], Any] = {}
        command = None
        if path is not None:
            from_file, command = self._read_ini(path)
            raw.update(from_file)
        for dotted, value in (overrides or {}).items():
            if value is None:
                continue
            section, _, key = dotted.partition('.')
            self._check_known(section, key)
            raw[(section, key)] = value

        fields = {}
        for section, keys in self.schema.items():
            for key, spec in keys.items():
                value = raw.get((section, key), spec['default'])
                fields[FIELD_NAMES[(section, key)]] = self._coerce(section, key, value)

        config = RunConfig(**fields, command=command)
        logger.debug(f"Configuración resuelta: digest {config.digest()[:12]}")
        return config

    def from_fields(self, values: Mapping[str, Any]) -> RunConfig:
        """Valida un diccionario de campos de RunConfig."""
        fields = {}
        for (section, key), name in FIELD_NAMES.items():
            if name not in values:
                raise ConfigError("campo ausente", f"{section}.{key}")
            fields[name] = self._coerce(section, key, values[name])
        unknown = set(values) - set(fields)
        if unknown:
            raise ConfigError(f"campos desconocidos: {sorted(unknown)}")
        return RunConfig(**fields)

    def _read_ini(self, path: str) -> Tuple[Dict[Tuple[str, str], str], Optional[CommandRecord]]:
        file_path = Path(path)
        if not file_path.is_file():
            raise FormatError(f"No existe el archivo de configuración: {path}")
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read(file_path, encoding='utf-8')
        except configparser.Error as e:
            raise FormatError(f"Archivo INI inválido ({path}): {e}")

        raw = {}
        command = None
        for section in parser.sections():
            if section == 'meta':
                continue
            if section == COMMAND_SECTION:
                command = self._read_command(parser[section])
                continue
            for key, value in parser[section].items():
                self._check_known(section, key)
                raw[(section, key)] = value
        return raw, command

    @staticmethod
    def _read_command(section: Mapping[str, str]) -> CommandRecord:
        entries = dict(section)
        name = entries.pop('name', '').strip()
        if not name:
            raise ConfigError("falta el nombre del subcomando", f"{COMMAND_SECTION}.name")
        values = {}
        for key, text in entries.items():
            try:
                values[key] = json.loads(text)
            except ValueError:
                raise ConfigError(f"valor JSON inválido: {text!r}", f"{COMMAND_SECTION}.{key}")
        return CommandRecord.from_values(name, values)

    def _check_known(self, section: str, key: str):
        if section not in self.schema:
            raise ConfigError("sección desconocida", section)
        if key not in self.schema[section]:
            raise ConfigError("clave desconocida", f"{section}.{key}")

    def _coerce(self, section: str, key: str, value: Any) -> Any:
        spec = self.schema[section][key]
        path = f"{section}.{key}"
        allow = spec.get('allow', [])

        if value is None and allow:
            return None
        if isinstance(value, str):
            text = value.strip()
            if text.lower() in allow:
                return None
            value = text

        kind = spec['type']
        try:
            if kind == 'int':
                if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                    raise ValueError(value)
                value = int(value)
            elif kind == 'float':
                value = float(value)
            elif kind == 'bool':
                if isinstance(value, str):
                    if value.lower() not in _BOOL_WORDS:
                        raise ValueError(value)
                    value = _BOOL_WORDS[value.lower()]
                else:
                    value = bool(value)
            else:
                value = str(value)
        except (TypeError, ValueError):
            accepted = f" o {'/'.join(allow)}" if allow else ""
            raise ConfigError(f"se esperaba {kind}{accepted}, recibido {value!r}", path)

        if kind in ('int', 'float'):
            if value != value:
                raise ConfigError("valor NaN", path)
            if 'min' in spec and value < spec['min']:
                raise ConfigError(f"{value} < mínimo {spec['min']}", path)
            if 'max' in spec and value > spec['max']:
                raise ConfigError(f"{value} > máximo {spec['max']}", path)
        return value

    def write_resolved(self, config: RunConfig, path: str) -> Path:
        """Escribe la configuración resuelta junto a los resultados."""
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(config.to_ini(), encoding='utf-8')
        logger.info(f"Configuración resuelta escrita en {out}")
        return out


def default_config(**changes) -> RunConfig:
    """Configuración por defecto con cambios opcionales (útil en tests)."""
    config = ConfigLoader().load()
    return config.replace(**changes) if changes else config
