# Relata/constants.py

# 光速，精確定義值 (m/s)
C = 299_792_458.0
C_SQUARED = C * C

# 每個試驗消耗一個 Philox 計數區塊（四個 64 位元字）
DRAWS_PER_TRIAL = 4
BLOCK_SIZE = 65_536

CONFIG_SCHEMA_VERSION = 1
MANIFEST_VERSION = 1

# 時間差落在運算元捨入誤差的這個倍數內時視為同時
TIE_ROUNDING_ULPS = 8
