# hexinject - Command-Line Package
