# Constantes para o toolkit de ruído artificial contra ataques de canal lateral

# Piso numérico aplicado aos denominadores de variância (traços sem ruído dividiriam por zero)
VARIANCE_EPSILON = 1e-12

# Regularização da covariância agrupada dos templates: fração da média da diagonal
COVARIANCE_RIDGE = 1e-6

# Fator do piso de ruído por janela na seleção ppc (janela só contribui se max > fator * mediana)
WINDOW_FLOOR_FACTOR = 2.0

# Fração do score máximo usada pelo método allap
ALLAP_THRESHOLD = 0.1

# Métodos da família DoM e seus pontos por ciclo de clock
PPC_METHODS = {
    "1ppc": 1,
    "3ppc": 3,
    "20ppc": 20,
}

# Ordem canônica dos esquemas nos relatórios
SCHEME_ORDER = ["OA", "RnF", "RnP", "ArN"]

# Esquemas cujo resultado não depende de A (agrupados ao varrer A)
A_INDEPENDENT_SCHEMES = ("OA", "RnF")

# Colunas do CSV de resultados (métricas por esquema mais variáveis de varredura)
RESULT_COLUMNS = [
    "sweep", "point", "scheme", "S_D", "S_A", "A", "rho", "I_p", "I_a",
    "omega_p", "omega_f", "SRR", "EE_avg", "noise_energy", "n_trials",
]

# Colunas do CSV de capacidade
CAPACITY_COLUMNS = [
    "sweep", "point", "scheme", "A", "rho", "snr", "capacity_bits",
    "signal_energy", "device_noise_energy", "injected_noise_energy",
]

# Versão dos formatos de arquivo de traços
TRACE_TEXT_MAGIC = "TRACESET"
TRACE_BINARY_MAGIC = b"TRSB"
TRACE_FORMAT_VERSION = 1
PROFILE_MAGIC = "TEMPLATES"

# Layout do conjunto Grizzly (256 chaves x 3072 traços x 2500 amostras int16)
GRIZZLY_LAYOUT = {
    "keys": 256,
    "traces_per_key": 3072,
    "samples": 2500,
}

# Padrões de bancada (escala reduzida para rodar em segundos)
DESK_DEFAULTS = {
    "B": 8,
    "m": 200,
    "informative": 8,
    "clock_len": 25,
    "sigma_n": 2.0,
    "n_keys": 32,
    "n_tests": 20,
}

# Prefixo das variáveis de ambiente de configuração
ENV_PREFIX = "ARN_"
