class InvalidArgumentError(ValueError):
    """
    Exception raised when an operation of the simulator gets an argument
    that violates its precondition

    @var argument The name of the offending argument or field
    @var reason Why the value is rejected
    """
    def __init__(self, argument, reason):
        super().__init__(argument, reason)
        self.argument = argument
        self.reason = reason

    def __str__(self):
        return "invalid argument '{}': {}".format(self.argument, self.reason)

class SimulationDivergedError(Exception):
    """
    Exception raised when the simulated vehicle leaves the region the model
    is valid in (non-finite state or pitch beyond the gimbal-lock guard)

    @var reason The description of the divergence
    @var tick The index of the physics tick, or None if unknown
    """
    def __init__(self, reason, tick = None):
        super().__init__(reason, tick)
        self.reason = reason
        self.tick = tick

    def __str__(self):
        if self.tick is None:
            return "simulation diverged: {}".format(self.reason)
        return "simulation diverged at tick {}: {}".format(self.tick, self.reason)

class ConfigError(Exception):
    """
    Exception raised when the mission config has an invalid or unknown key

    @var key The offending config key
    @var reason The error message
    """
    def __init__(self, key, reason):
        super().__init__(key, reason)
        self.key = key
        self.reason = reason

    def __str__(self):
        return "config key '{}': {}".format(self.key, self.reason)

class ConfigSyntaxError(ConfigError):
    """
    Exception raised when a line of the mission config cannot be parsed
    """
    def __init__(self, line, column, reason):
        super().__init__("<line {}>".format(line), reason)
        self.args = (line, column, reason)
        self.line = line
        self.column = column

    def __str__(self):
        return "config syntax error at line {}, column {}: {}".format(
            self.line, self.column, self.reason)

class ExecutionCommandError(Exception):
    """
    Exception raised when parsed invalid execution command
    """
    def __init__(self, message):
        super().__init__(message)
        self.message = message

    def __str__(self):
        return self.message

def require(condition: bool, argument: str, reason: str):
    """
    Raise `InvalidArgumentError` for `argument` if `condition` does not hold
    """
    if not condition:
        raise InvalidArgumentError(argument, reason)
