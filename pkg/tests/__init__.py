# Test modules for hexinject
