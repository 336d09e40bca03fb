"""Hierarquia de exceções usada por todo o toolkit."""


class DomainError(ValueError):
    """Entrada fora do domínio de uma operação (dimensões, faixas, conjuntos vazios)."""


class ConfigError(DomainError):
    """Valor de configuração inválido."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"Configuração inválida para '{key}': {message}")


class TraceFormatError(DomainError):
    """
    Erro de leitura de um arquivo de traços.

    Args:
        message (str): Descrição do problema
        position (int): Linha (texto) ou offset em bytes (binário) do registro
        unit (str): "linha" ou "byte"
        record (str, opcional): Trecho do registro ofensivo
    """

    def __init__(self, message, position, unit="linha", record=None):
        self.position = position
        self.unit = unit
        self.record = record
        detail = f"{message} ({unit} {position})"
        if record:
            detail += f": {record[:80]!r}"
        super().__init__(detail)
