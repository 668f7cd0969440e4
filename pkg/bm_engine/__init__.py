# Beam-management energy engine package initializer
