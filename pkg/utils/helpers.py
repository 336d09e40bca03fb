import numpy as np
import pandas as pd


def format_percentage(value):
    """
    Formata um valor decimal como percentual.

    Args:
        value (float): Valor a ser formatado (ex: 0.4422)

    Returns:
        str: Valor formatado como percentual (ex: 44,22%)
    """
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return "-"
    return f"{value * 100:.2f}%".replace(".", ",")


def format_ee(value):
    """
    Formata um valor de eficiência energética com quatro casas decimais.

    Args:
        value (float): Valor de EE (NaN quando não se aplica, ex: OA)

    Returns:
        str: Valor formatado (ex: 3,1175) ou "-"
    """
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return "-"
    return f"{value:.4f}".replace(".", ",")


def derive_rng(*parts):
    """
    Cria um gerador numpy determinístico a partir de uma tupla de inteiros.

    Cada unidade paralela (ponto de varredura, chave, teste) recebe o seu
    próprio gerador, então a ordem de execução nunca muda os resultados.

    Args:
        *parts (int): Semente mestre seguida dos índices da unidade

    Returns:
        numpy.random.Generator: Gerador independente
    """
    return np.random.default_rng(np.random.SeedSequence([int(p) for p in parts]))


def render_table(df, columns=None):
    """
    Renderiza um DataFrame como tabela de texto para relatórios.

    Args:
        df (pd.DataFrame): Tabela a ser renderizada
        columns (dict, opcional): Mapeamento coluna -> rótulo exibido

    Returns:
        str: Tabela em texto puro
    """
    if df.empty:
        return "(sem resultados)"
    df_display = df.copy()
    if columns:
        df_display = df_display[[c for c in columns if c in df_display.columns]]
        df_display = df_display.rename(columns=columns)
    return df_display.to_string(index=False)


def create_scheme_table(results):
    """
    Monta a tabela comparativa: uma linha por (S_D, S_A) e colunas
    SRR / EE_avg por esquema.

    Args:
        results (pd.DataFrame): Linhas de resultado (colunas de RESULT_COLUMNS)

    Returns:
        pd.DataFrame: Tabela pivotada e formatada
    """
    if results.empty:
        return pd.DataFrame()

    grouped = results.groupby(["S_D", "S_A", "scheme"], sort=False)[["SRR", "EE_avg"]].mean()
    table = grouped.unstack("scheme")

    rows = []
    for (s_d, s_a), row in table.iterrows():
        entry = {"(S_D, S_A)": f"({s_d}, {s_a})"}
        for scheme in ("OA", "RnF", "RnP", "ArN"):
            if ("SRR", scheme) not in row.index:
                continue
            entry[f"{scheme} SRR"] = format_percentage(row[("SRR", scheme)])
            if scheme != "OA":
                entry[f"{scheme} EE"] = format_ee(row[("EE_avg", scheme)])
        rows.append(entry)
    return pd.DataFrame(rows)
