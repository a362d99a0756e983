# Compute module for calculations