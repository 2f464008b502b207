# hexinject - magic-state injection simulator
# Main package initialization
