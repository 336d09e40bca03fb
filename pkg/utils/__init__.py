"""Configuração, constantes, exceções e funções auxiliares."""
