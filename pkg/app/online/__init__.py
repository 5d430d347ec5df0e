"""
Online - Algoritmos OHA y RPA
"""

default_app_config = "online.apps.OnlineConfig"
