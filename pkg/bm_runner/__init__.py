# Command-line runner package initializer
