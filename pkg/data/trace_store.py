"""
Persistência de conjuntos de traços.

Formatos suportados:

canonical-text (versão 1)
    Cada seção começa com uma linha de cabeçalho
    ``TRACESET v1 m=<m> B=<B> role=<papel> counts=<k>:<n>,<k>:<n>,...``
    seguida de uma linha ``key,sample_0,...,sample_{m-1}`` por traço, em
    decimal. Um arquivo tem uma seção (dividida depois) ou duas
    (perfilamento e ataque).

canonical-binary (versão 1, little-endian)
    Por seção: ``b"TRSB"``, versão u16, papel u8, B u16, m u32, número de
    chaves u32, escala f64; depois (chave u32, contagem u32) por chave e as
    amostras int16 em ordem de chave. amostra = int16 * escala. A escala é
    única no arquivo: toda seção repete o mesmo valor.

grizzly-adapter
    Arquivo int16 little-endian bruto com forma (chaves, traços por chave,
    amostras), em ordem de chave.
"""
import logging
import math
import os
import struct

import numpy as np

from data.traces import ROLES, Dataset, TraceSet
from utils.constants import (
    GRIZZLY_LAYOUT, TRACE_BINARY_MAGIC, TRACE_FORMAT_VERSION, TRACE_TEXT_MAGIC,
)
from utils.errors import DomainError, TraceFormatError

logger = logging.getLogger(__name__)

FORMATS = ("canonical-text", "canonical-binary", "grizzly-adapter")

_SECTION_HEADER = struct.Struct("<4sHBHIId")
_KEY_ENTRY = struct.Struct("<II")


def _format_header(trace_set):
    counts = ",".join(f"{k}:{n}" for k, n in trace_set.counts.items())
    return (
        f"{TRACE_TEXT_MAGIC} v{TRACE_FORMAT_VERSION} m={trace_set.m} B={trace_set.B} "
        f"role={trace_set.role} counts={counts}"
    )


def _parse_header(line, lineno):
    fields = line.split()
    if len(fields) != 6 or fields[0] != TRACE_TEXT_MAGIC:
        raise TraceFormatError("Cabeçalho de seção mal formado", lineno, record=line)
    if fields[1] != f"v{TRACE_FORMAT_VERSION}":
        raise TraceFormatError(f"Versão de formato não suportada: {fields[1]}", lineno, record=line)
    try:
        values = dict(f.split("=", 1) for f in fields[2:])
        m, B, role = int(values["m"]), int(values["B"]), values["role"]
        counts = {}
        for item in filter(None, values["counts"].split(",")):
            key, n = item.split(":")
            counts[int(key)] = int(n)
    except (KeyError, ValueError) as e:
        raise TraceFormatError(f"Cabeçalho de seção inválido ({e})", lineno, record=line) from e
    if role not in ROLES:
        raise TraceFormatError(f"Papel desconhecido: {role}", lineno, record=line)
    return m, B, role, counts


def write_text(path, trace_sets):
    """
    Grava uma ou mais seções no formato texto canônico.

    Args:
        path (str): Arquivo de destino
        trace_sets (list): TraceSets, um por seção
    """
    with open(path, "w") as f:
        for trace_set in trace_sets:
            f.write(_format_header(trace_set) + "\n")
            for key in trace_set.keys:
                for row in trace_set.get(key):
                    # repr de float é a menor representação que volta ao mesmo valor
                    f.write(str(key) + "," + ",".join(repr(float(v)) for v in row) + "\n")


def read_text(path):
    """
    Lê todas as seções de um arquivo texto canônico.

    Args:
        path (str): Arquivo de origem

    Returns:
        list: TraceSets na ordem do arquivo
    """
    sections = []
    with open(path) as f:
        lines = [(i + 1, line.strip()) for i, line in enumerate(f)]
    lines = [(i, line) for i, line in lines if line]
    if not lines:
        raise TraceFormatError("Arquivo vazio", 1)

    pos = 0
    while pos < len(lines):
        lineno, line = lines[pos]
        m, B, role, counts = _parse_header(line, lineno)
        expected = sum(counts.values())
        rows = {k: [] for k in counts}
        for offset in range(expected):
            if pos + 1 + offset >= len(lines):
                raise TraceFormatError(
                    f"Arquivo truncado: seção declara {expected} traços, encontrados {offset}",
                    lines[-1][0] + 1,
                )
            rec_no, record = lines[pos + 1 + offset]
            if record.startswith(TRACE_TEXT_MAGIC):
                raise TraceFormatError(
                    f"Seção truncada: declarados {expected} traços, encontrados {offset}", rec_no, record=record
                )
            parts = record.split(",")
            if len(parts) != m + 1:
                raise TraceFormatError(f"Registro com {len(parts) - 1} amostras, esperado {m}", rec_no, record=record)
            try:
                key = int(parts[0])
                samples = [float(v) for v in parts[1:]]
            except ValueError as e:
                raise TraceFormatError(f"Valor não numérico ({e})", rec_no, record=record) from e
            if key not in rows:
                raise TraceFormatError(f"Chave {key} não declarada no cabeçalho", rec_no, record=record)
            rows[key].append(samples)
        for key, n in counts.items():
            if len(rows[key]) != n:
                raise TraceFormatError(
                    f"Chave {key}: cabeçalho declara {n} traços, encontrados {len(rows[key])}", lineno, record=line
                )
        traces = {k: np.array(v, dtype=float).reshape(len(v), m) for k, v in rows.items()}
        sections.append(TraceSet(m, B, traces, role))
        pos += 1 + expected
    return sections


def write_binary(path, trace_sets):
    """
    Grava seções no formato binário compacto (int16 com uma escala para o arquivo).

    Args:
        path (str): Arquivo de destino
        trace_sets (list): TraceSets, um por seção
    """
    peak = max((float(np.max(np.abs(t.stacked()[0]))) for t in trace_sets if t.n_traces), default=0.0)
    scale = peak / 32767.0 if peak > 0 else 1.0
    with open(path, "wb") as f:
        for trace_set in trace_sets:
            samples, _ = trace_set.stacked()
            f.write(_SECTION_HEADER.pack(
                TRACE_BINARY_MAGIC, TRACE_FORMAT_VERSION, ROLES.index(trace_set.role),
                trace_set.B, trace_set.m, len(trace_set.keys), scale,
            ))
            for key, n in trace_set.counts.items():
                f.write(_KEY_ENTRY.pack(key, n))
            f.write(np.round(samples / scale).astype("<i2").tobytes())


def read_binary(path):
    """
    Lê todas as seções de um arquivo binário canônico.

    Returns:
        list: TraceSets na ordem do arquivo
    """
    with open(path, "rb") as f:
        blob = f.read()
    sections = []
    offset = 0
    file_scale = None
    while offset < len(blob):
        if offset + _SECTION_HEADER.size > len(blob):
            raise TraceFormatError("Cabeçalho binário truncado", offset, unit="byte")
        magic, version, role_code, B, m, n_keys, scale = _SECTION_HEADER.unpack_from(blob, offset)
        if magic != TRACE_BINARY_MAGIC:
            raise TraceFormatError(f"Assinatura inválida {magic!r}", offset, unit="byte")
        if version != TRACE_FORMAT_VERSION:
            raise TraceFormatError(f"Versão binária não suportada: {version}", offset, unit="byte")
        if role_code >= len(ROLES) or not scale > 0:
            raise TraceFormatError("Cabeçalho binário inválido", offset, unit="byte")
        if file_scale is not None and scale != file_scale:
            raise TraceFormatError(f"Escala {scale!r} difere da escala do arquivo {file_scale!r}", offset, unit="byte")
        file_scale = scale
        offset += _SECTION_HEADER.size

        counts = {}
        for _ in range(n_keys):
            if offset + _KEY_ENTRY.size > len(blob):
                raise TraceFormatError("Tabela de chaves truncada", offset, unit="byte")
            key, n = _KEY_ENTRY.unpack_from(blob, offset)
            counts[key] = n
            offset += _KEY_ENTRY.size

        n_samples = sum(counts.values()) * m
        if offset + 2 * n_samples > len(blob):
            raise TraceFormatError(
                f"Amostras truncadas: esperados {2 * n_samples} bytes, restam {len(blob) - offset}",
                offset, unit="byte",
            )
        data = np.frombuffer(blob, dtype="<i2", count=n_samples, offset=offset).astype(float) * scale
        offset += 2 * n_samples

        traces, start = {}, 0
        for key, n in counts.items():
            traces[key] = data[start * m:(start + n) * m].reshape(n, m)
            start += n
        sections.append(TraceSet(m, B, traces, ROLES[role_code]))
    return sections


def write_grizzly(path, samples):
    """
    Grava um array int16 (chaves, traços, amostras) no layout Grizzly.

    Args:
        path (str): Arquivo de destino
        samples (np.ndarray): Amostras inteiras
    """
    np.asarray(samples).astype("<i2").tofile(path)


def read_grizzly(path, keys=None, traces_per_key=None, samples=None, profiling_count=None, attack_count=None):
    """
    Adapta o layout Grizzly (256 x 3072 x 2500 amostras int16) para o Dataset canônico.

    Args:
        path (str): Arquivo bruto
        keys, traces_per_key, samples (int): Forma do arquivo (padrão: layout Grizzly)
        profiling_count (int, opcional): Traços de perfilamento por chave (padrão: metade)
        attack_count (int, opcional): Traços de ataque por chave (padrão: todo o resto)

    Returns:
        Dataset: Perfilamento e ataque disjuntos
    """
    keys = keys or GRIZZLY_LAYOUT["keys"]
    traces_per_key = traces_per_key or GRIZZLY_LAYOUT["traces_per_key"]
    samples = samples or GRIZZLY_LAYOUT["samples"]
    B = int(round(math.log2(keys)))
    if 1 << B != keys:
        raise DomainError(f"Número de chaves {keys} não é potência de 2")

    expected = keys * traces_per_key * samples * 2
    size = os.path.getsize(path)
    if size != expected:
        raise TraceFormatError(
            f"Tamanho {size} não confere com {keys}x{traces_per_key}x{samples} int16 ({expected} bytes)",
            min(size, expected), unit="byte",
        )
    raw = np.memmap(path, dtype="<i2", mode="r", shape=(keys, traces_per_key, samples))

    n_prof = traces_per_key // 2 if profiling_count is None else profiling_count
    n_att = traces_per_key - n_prof if attack_count is None else attack_count
    if n_prof + n_att > traces_per_key:
        raise DomainError(f"Perfilamento ({n_prof}) + ataque ({n_att}) excede {traces_per_key} traços por chave")
    # visões int16 do memmap; cada chave vira float só nas linhas sorteadas
    profiling = TraceSet(samples, B, {k: raw[k, :n_prof] for k in range(keys)}, "profiling")
    attack = TraceSet(samples, B, {k: raw[k, n_prof:n_prof + n_att] for k in range(keys)}, "attack")
    return Dataset(profiling, attack, source=str(path), fmt="grizzly-adapter")


def _to_dataset(sections, path, fmt, profiling_count):
    if len(sections) == 2:
        by_role = {s.role: s for s in sections}
        profiling = by_role.get("profiling", sections[0])
        attack = by_role.get("attack", sections[1])
        return Dataset(profiling.with_role("profiling"), attack.with_role("attack"), str(path), fmt)
    if len(sections) != 1:
        raise DomainError(f"{path}: esperadas 1 ou 2 seções, encontradas {len(sections)}")
    single = sections[0]
    n_prof = profiling_count if profiling_count is not None else min(single.counts.values(), default=0) // 2
    profiling, attack = single.split(n_prof)
    if not attack.traces:
        raise DomainError(
            f"{path}: {n_prof} traços de perfilamento por chave deixam o conjunto de ataque vazio "
            f"(a seção tem {max(single.counts.values(), default=0)} por chave)"
        )
    return Dataset(profiling, attack, str(path), fmt)


def ingest(path, fmt="canonical-text", profiling_count=None, **layout):
    """
    Lê um arquivo de traços e devolve um Dataset validado.

    Args:
        path (str): Arquivo de origem
        fmt (str): "canonical-text", "canonical-binary" ou "grizzly-adapter"
        profiling_count (int, opcional): Traços de perfilamento por chave
            quando o arquivo tem uma única seção
        **layout: Forma do arquivo Grizzly (keys, traces_per_key, samples, attack_count)

    Returns:
        Dataset: Perfilamento e ataque
    """
    if fmt not in FORMATS:
        raise DomainError(f"Formato desconhecido: {fmt} (opções: {', '.join(FORMATS)})")
    if not os.path.exists(path):
        raise DomainError(f"Arquivo não encontrado: {path}")
    if fmt == "grizzly-adapter":
        dataset = read_grizzly(path, profiling_count=profiling_count, **layout)
    elif fmt == "canonical-binary":
        dataset = _to_dataset(read_binary(path), path, fmt, profiling_count)
    else:
        dataset = _to_dataset(read_text(path), path, fmt, profiling_count)
    logger.info(
        "Dataset %s: m=%d, B=%d, %d traços de perfilamento, %d de ataque",
        path, dataset.m, dataset.B, dataset.profiling.n_traces, dataset.attack.n_traces,
    )
    return dataset


class TraceStore:
    """
    Classe para gravar e recuperar conjuntos de traços em um diretório de dados.
    """

    def __init__(self, data_dir="data"):
        """
        Inicializa o repositório de traços.

        Args:
            data_dir (str): Diretório onde os arquivos serão armazenados
        """
        self.data_dir = data_dir
        # Garantir que o diretório de dados exista
        os.makedirs(data_dir, exist_ok=True)

    def path(self, name, fmt="canonical-text"):
        extension = ".bin" if fmt == "canonical-binary" else ".txt"
        return os.path.join(self.data_dir, name + extension)

    def save(self, dataset, name, fmt="canonical-text"):
        """
        Salva um Dataset (duas seções) no formato escolhido.

        Returns:
            str: Caminho do arquivo gravado
        """
        path = self.path(name, fmt)
        sections = [dataset.profiling, dataset.attack]
        if fmt == "canonical-binary":
            write_binary(path, sections)
        elif fmt == "canonical-text":
            write_text(path, sections)
        else:
            raise DomainError(f"Formato de gravação não suportado: {fmt}")
        logger.info("Dataset salvo em %s", path)
        return path

    def load(self, name, fmt="canonical-text"):
        return ingest(self.path(name, fmt), fmt)
