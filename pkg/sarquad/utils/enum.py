from enum import Enum, auto

class StringEnum(str, Enum):
    """
    The enum whose members compare equal to their own names, so the values read
    from config files and command lines can be matched directly
    """
    def _generate_next_value_(name, start, count, last_values):
        return name.lower()

    @classmethod
    def parse(cls, text: str):
        """
        Get the member whose value is `text` (case-insensitive)

        @return The matched member
        @exception ValueError If no member matches. The message lists the choices.
        """
        for member in cls:
            if member.value == text.strip().lower():
                return member

        raise ValueError("'{}' is not one of {}".format(
            text, ", ".join(member.value for member in cls)))

    def __eq__(self, other):
        if isinstance(other, StringEnum):
            return self.value == other.value
        elif isinstance(other, str):
            return self.value == other

        return False

    def __ne__(self, other):
        return not self.__eq__(other)

    def __str__(self):
        return self.value

    def __hash__(self):
        return hash(self.value)
