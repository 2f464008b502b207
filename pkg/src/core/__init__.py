# Core utilities and infrastructure 