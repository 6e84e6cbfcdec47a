version = "SARQuad 1.0.0"
